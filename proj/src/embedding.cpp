#include "cscd/embedding.hpp"

#include "cscd/errors.hpp"
#include "cscd/ops.hpp"

#include <numeric>
#include <vector>

namespace cscd {
namespace {

Array zeros(int rows, int cols) { return Array(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)); }

std::vector<int> iota(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

} // namespace

void Embedding::add_parameters(ParameterStore& store) const {
    const int d = dims_.dim;
    store.add("embed.concept.W", zeros(dims_.concepts, d));
    store.add("embed.concept.b", zeros(1, d), ParamRole::Bias);
    store.add("embed.relation.W", zeros(dims_.relation_slots(), d));
    store.add("embed.relation.b", zeros(1, d), ParamRole::Bias);
    store.add("embed.learner.W", zeros(dims_.learners, d));
    store.add("embed.learner.b", zeros(1, d), ParamRole::Bias);
    store.add("embed.personal_concept.W", zeros(d, 2 * d));
    store.add("embed.personal_concept.b", zeros(1, d), ParamRole::Bias);
    store.add("embed.personal_relation.W", zeros(d, 2 * d));
    store.add("embed.personal_relation.b", zeros(1, d), ParamRole::Bias);
    store.add("embed.difficulty.W", zeros(dims_.exercises, dims_.concepts));
    store.add("embed.difficulty.b", zeros(1, dims_.concepts), ParamRole::Bias);
    store.add("embed.discrimination.W", zeros(dims_.exercises, 1));
    store.add("embed.discrimination.b", zeros(1, 1), ParamRole::Bias);
}

void Embedding::check_learners(std::span<const int> learners) const {
    for (int n : learners) {
        if (n < 0 || n >= dims_.learners) {
            throw IndexError("learner " + std::to_string(n) + " outside [0," + std::to_string(dims_.learners) + ")");
        }
    }
}

Var Embedding::learner_vectors(Tape& tape, ParameterStore& store, std::span<const int> learners) const {
    check_learners(learners);
    Var table = tape.parameter(store.at("embed.learner.W"));
    Var bias = tape.parameter(store.at("embed.learner.b"));
    return ops::sigmoid(ops::add_row(ops::gather_rows(table, learners), bias));
}

Var Embedding::concept_vectors(Tape& tape, ParameterStore& store) const {
    Var table = tape.parameter(store.at("embed.concept.W"));
    Var bias = tape.parameter(store.at("embed.concept.b"));
    return ops::sigmoid(ops::add_row(table, bias));
}

Var Embedding::relation_vectors(Tape& tape, ParameterStore& store) const {
    Var table = tape.parameter(store.at("embed.relation.W"));
    Var bias = tape.parameter(store.at("embed.relation.b"));
    return ops::sigmoid(ops::add_row(table, bias));
}

Var Embedding::personalize_rows(Tape& tape, ParameterStore& store, Var learner_vecs, Var base,
                                std::size_t per_learner, const char* weight, const char* bias) const {
    const std::size_t u = learner_vecs.rows();
    std::vector<int> learner_idx(u * per_learner);
    std::vector<int> base_idx(u * per_learner);
    for (std::size_t i = 0; i < u; ++i) {
        for (std::size_t k = 0; k < per_learner; ++k) {
            learner_idx[i * per_learner + k] = static_cast<int>(i);
            base_idx[i * per_learner + k] = static_cast<int>(k);
        }
    }
    Var joined = ops::concat({ops::gather_rows(learner_vecs, learner_idx), ops::gather_rows(base, base_idx)});
    return ops::sigmoid(ops::linear(joined, tape.parameter(store.at(weight)), tape.parameter(store.at(bias))));
}

Var Embedding::embed_concepts(Tape& tape, ParameterStore& store, std::span<const int> learners) const {
    Var hn = learner_vectors(tape, store, learners);
    Var hk = concept_vectors(tape, store);
    return personalize_rows(tape, store, hn, hk, static_cast<std::size_t>(dims_.concepts), "embed.personal_concept.W",
                            "embed.personal_concept.b");
}

std::pair<Var, Var> Embedding::embed_relations(Tape& tape, ParameterStore& store, std::span<const int> learners) const {
    return relations_for(tape, store, learner_vectors(tape, store, learners));
}

std::pair<Var, Var> Embedding::relations_for(Tape& tape, ParameterStore& store, Var learner_vecs) const {
    Var base = relation_vectors(tape, store);
    const std::vector<int> pre = iota(dims_.prereq_edges);
    std::vector<int> dep = iota(dims_.dep_edges);
    for (int& i : dep) i += dims_.prereq_edges;
    Var pre_out = personalize_rows(tape, store, learner_vecs, ops::gather_rows(base, pre), pre.size(),
                                   "embed.personal_relation.W", "embed.personal_relation.b");
    Var dep_out = personalize_rows(tape, store, learner_vecs, ops::gather_rows(base, dep), dep.size(),
                                   "embed.personal_relation.W", "embed.personal_relation.b");
    return {pre_out, dep_out};
}

PersonalizedGraphState Embedding::personalize(Tape& tape, ParameterStore& store, std::span<const int> learners) const {
    Var hn = learner_vectors(tape, store, learners);
    Var concepts = personalize_rows(tape, store, hn, concept_vectors(tape, store), static_cast<std::size_t>(dims_.concepts),
                                    "embed.personal_concept.W", "embed.personal_concept.b");
    auto [pre, dep] = relations_for(tape, store, hn);
    return {concepts, pre, dep, static_cast<int>(learners.size())};
}

ExerciseFeatures Embedding::exercise_features(Tape& tape, ParameterStore& store, std::span<const int> exercises,
                                              const QMatrix& qmatrix) const {
    if (qmatrix.concept_count() != dims_.concepts) throw DimensionError("Q-matrix concept count differs from K");
    Array q(exercises.size(), static_cast<std::size_t>(dims_.concepts));
    for (std::size_t i = 0; i < exercises.size(); ++i) {
        const int e = exercises[i];
        if (e < 0 || e >= dims_.exercises) {
            throw IndexError("exercise " + std::to_string(e) + " outside [0," + std::to_string(dims_.exercises) + ")");
        }
        for (int k : qmatrix.exercise_concepts(e)) q(i, static_cast<std::size_t>(k)) = 1.0;
    }
    Var diff = ops::sigmoid(ops::add_row(ops::gather_rows(tape.parameter(store.at("embed.difficulty.W")), exercises),
                                         tape.parameter(store.at("embed.difficulty.b"))));
    Var disc = ops::sigmoid(ops::add_row(ops::gather_rows(tape.parameter(store.at("embed.discrimination.W")), exercises),
                                         tape.parameter(store.at("embed.discrimination.b"))));
    return {diff, disc, tape.constant(std::move(q))};
}

} // namespace cscd
