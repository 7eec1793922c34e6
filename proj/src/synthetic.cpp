#include "cscd/synthetic.hpp"

#include "csv.hpp"
#include "cscd/errors.hpp"
#include "cscd/metrics.hpp"
#include "cscd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace cscd {

void SyntheticSpec::validate() const {
    auto prob = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    };
    prob(prereq_density, "prereq density");
    prob(dep_density, "dep density");
    prob(defect_rate, "defect rate");
    prob(guess, "guess");
    prob(slip, "slip");
    prob(mastery_rate, "mastery rate");
    if (concepts < 2) throw ConfigError("synthetic data needs at least 2 concepts");
    if (learners < 1 || exercises < 1) throw ConfigError("learner and exercise counts must be positive");
    if (latent_dim < 1) throw ConfigError("latent dimension must be positive");
    if (!(ability_weight >= 0.0 && std::isfinite(ability_weight))) throw ConfigError("ability weight must be finite and non-negative");
    if (max_concepts_per_exercise < 1) throw ConfigError("max concepts per exercise must be positive");
    if (responses_per_learner < 0 || responses_per_learner > exercises) {
        throw ConfigError("responses per learner must lie in [0, exercises]");
    }
}

GroundTruth::GroundTruth(int learners, int concepts, int prereq_edges, int dep_edges)
    : learners_(learners), concepts_(concepts), prereq_(prereq_edges), dep_(dep_edges),
      mastery_(static_cast<std::size_t>(learners) * concepts, 0),
      understanding_(static_cast<std::size_t>(learners) * (prereq_edges + dep_edges), 1) {}

bool GroundTruth::masters(int learner, int concept_id) const {
    if (learner < 0 || learner >= learners_ || concept_id < 0 || concept_id >= concepts_) throw IndexError("truth: mastery index out of range");
    return mastery_[static_cast<std::size_t>(learner) * concepts_ + concept_id] != 0;
}

void GroundTruth::set_mastery(int learner, int concept_id, bool value) {
    if (learner < 0 || learner >= learners_ || concept_id < 0 || concept_id >= concepts_) throw IndexError("truth: mastery index out of range");
    mastery_[static_cast<std::size_t>(learner) * concepts_ + concept_id] = value ? 1 : 0;
}

std::size_t GroundTruth::slot(RelationKind kind, int edge_index) const {
    const int limit = kind == RelationKind::Prerequisite ? prereq_ : dep_;
    if (edge_index < 0 || edge_index >= limit) throw IndexError("truth: edge index out of range");
    return static_cast<std::size_t>(kind == RelationKind::Prerequisite ? edge_index : prereq_ + edge_index);
}

bool GroundTruth::understands(int learner, RelationKind kind, int edge_index) const {
    if (learner < 0 || learner >= learners_) throw IndexError("truth: learner out of range");
    return understanding_[static_cast<std::size_t>(learner) * edge_slots() + slot(kind, edge_index)] != 0;
}

void GroundTruth::set_understanding(int learner, RelationKind kind, int edge_index, bool value) {
    if (learner < 0 || learner >= learners_) throw IndexError("truth: learner out of range");
    understanding_[static_cast<std::size_t>(learner) * edge_slots() + slot(kind, edge_index)] = value ? 1 : 0;
}

double response_probability(const GroundTruth& truth, const ConceptGraph& graph, int learner,
                            std::span<const int> concepts, double guess, double slip) {
    for (int k : concepts) {
        if (!truth.masters(learner, k)) return guess;
    }
    auto inside = [&](int k) { return std::find(concepts.begin(), concepts.end(), k) != concepts.end(); };
    for (RelationKind kind : {RelationKind::Prerequisite, RelationKind::Dependency}) {
        const auto& edges = graph.edges(kind);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (inside(edges[e].src) && inside(edges[e].dst) && !truth.understands(learner, kind, static_cast<int>(e))) {
                return guess;
            }
        }
    }
    return 1.0 - slip;
}

SyntheticDataset generate(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int K = spec.concepts;

    // Prerequisite DAG along a random topological order, then dependencies.
    std::vector<int> topo(static_cast<std::size_t>(K));
    std::iota(topo.begin(), topo.end(), 0);
    rng.shuffle(topo);
    ConceptGraph graph(K);
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
            if (rng.bernoulli(spec.prereq_density)) graph.add_prerequisite(topo[i], topo[j]);
    for (int a = 0; a < K; ++a)
        for (int b = a + 1; b < K; ++b) {
            if (graph.has_prerequisite(a, b) || graph.has_prerequisite(b, a)) continue;
            if (rng.bernoulli(spec.dep_density)) graph.add_dependency(a, b);
        }

    std::vector<std::vector<int>> adjacent(static_cast<std::size_t>(K));
    for (const Edge& e : graph.prerequisites()) {
        adjacent[e.src].push_back(e.dst);
        adjacent[e.dst].push_back(e.src);
    }
    for (const Edge& e : graph.dependencies()) {
        adjacent[e.src].push_back(e.dst);
        adjacent[e.dst].push_back(e.src);
    }

    // Exercises grow from a seed concept along graph neighbors.
    QMatrix q(spec.exercises, K);
    std::vector<std::vector<int>> exercise_sets(static_cast<std::size_t>(spec.exercises));
    const int max_size = std::min(spec.max_concepts_per_exercise, K);
    for (int e = 0; e < spec.exercises; ++e) {
        const int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_size)));
        std::set<int> chosen{static_cast<int>(rng.below(static_cast<std::uint64_t>(K)))};
        while (static_cast<int>(chosen.size()) < size) {
            std::vector<int> candidates;
            for (int c : chosen)
                for (int n : adjacent[c])
                    if (!chosen.count(n)) candidates.push_back(n);
            std::sort(candidates.begin(), candidates.end());
            candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
            if (candidates.empty()) {
                for (int k = 0; k < K; ++k)
                    if (!chosen.count(k)) candidates.push_back(k);
            }
            chosen.insert(candidates[rng.below(candidates.size())]);
        }
        for (int k : chosen) q.set(e, k);
        exercise_sets[static_cast<std::size_t>(e)].assign(chosen.begin(), chosen.end());
    }

    // Learners: correlated mastery from a low-dimensional ability, independent edge defects.
    const int P = static_cast<int>(graph.prerequisites().size());
    const int D = static_cast<int>(graph.dependencies().size());
    GroundTruth truth(spec.learners, K, P, D);
    std::vector<std::vector<double>> loading(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(spec.latent_dim)));
    for (auto& row : loading)
        for (double& v : row) v = rng.normal() / std::sqrt(static_cast<double>(spec.latent_dim));
    const double base = std::log(std::clamp(spec.mastery_rate, 1e-6, 1.0 - 1e-6) / (1.0 - std::clamp(spec.mastery_rate, 1e-6, 1.0 - 1e-6)));
    for (int n = 0; n < spec.learners; ++n) {
        std::vector<double> ability(static_cast<std::size_t>(spec.latent_dim));
        for (double& a : ability) a = rng.normal();
        for (int k = 0; k < K; ++k) {
            double z = base;
            for (int t = 0; t < spec.latent_dim; ++t) z += spec.ability_weight * ability[t] * loading[k][t];
            const double p = spec.mastery_rate <= 0.0 ? 0.0 : spec.mastery_rate >= 1.0 ? 1.0 : 1.0 / (1.0 + std::exp(-z));
            truth.set_mastery(n, k, rng.bernoulli(p));
        }
        for (int e = 0; e < P; ++e) truth.set_understanding(n, RelationKind::Prerequisite, e, !rng.bernoulli(spec.defect_rate));
        for (int e = 0; e < D; ++e) truth.set_understanding(n, RelationKind::Dependency, e, !rng.bernoulli(spec.defect_rate));
    }

    SyntheticDataset out;
    out.dataset.graph = graph;
    out.dataset.qmatrix = q;
    out.dataset.learner_count = spec.learners;
    const int per_learner = spec.responses_per_learner == 0 ? spec.exercises : spec.responses_per_learner;
    for (int n = 0; n < spec.learners; ++n) {
        std::vector<int> ex(static_cast<std::size_t>(spec.exercises));
        std::iota(ex.begin(), ex.end(), 0);
        if (per_learner < spec.exercises) {
            rng.shuffle(ex);
            ex.resize(static_cast<std::size_t>(per_learner));
            std::sort(ex.begin(), ex.end());
        }
        for (int e : ex) {
            const double p = response_probability(truth, graph, n, exercise_sets[static_cast<std::size_t>(e)], spec.guess, spec.slip);
            out.dataset.log.entries.push_back({n, e, rng.bernoulli(p) ? 1 : 0, Split::Train});
        }
    }
    out.truth = std::move(truth);
    return out;
}

void write_truth(const GroundTruth& truth, const ConceptGraph& graph, const std::filesystem::path& dir) {
    {
        std::ofstream out(dir / "truth_ks.csv", std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / "truth_ks.csv").string());
        out << "learner_id,concept_id,bit\n";
        for (int n = 0; n < truth.learners(); ++n)
            for (int k = 0; k < truth.concepts(); ++k) out << n << ',' << k << ',' << (truth.masters(n, k) ? 1 : 0) << '\n';
    }
    {
        std::ofstream out(dir / "truth_kus.csv", std::ios::binary);
        if (!out) throw IoError("cannot write " + (dir / "truth_kus.csv").string());
        out << "learner_id,src,dst,kind,bit\n";
        for (int n = 0; n < truth.learners(); ++n)
            for (RelationKind kind : {RelationKind::Prerequisite, RelationKind::Dependency}) {
                const auto& edges = graph.edges(kind);
                for (std::size_t e = 0; e < edges.size(); ++e) {
                    out << n << ',' << edges[e].src << ',' << edges[e].dst << ',' << to_string(kind) << ','
                        << (truth.understands(n, kind, static_cast<int>(e)) ? 1 : 0) << '\n';
                }
            }
    }
}

GroundTruth load_truth(const ConceptGraph& graph, int learners, const std::filesystem::path& dir) {
    const int P = static_cast<int>(graph.prerequisites().size());
    const int D = static_cast<int>(graph.dependencies().size());
    GroundTruth truth(learners, graph.concept_count(), P, D);
    auto read = [](const std::filesystem::path& path, auto&& row) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        std::string line;
        std::getline(in, line);
        std::vector<std::string> f;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (csv::trim(line).empty()) continue;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            csv::split_record(line, f);
            try {
                row(f);
            } catch (const std::exception& e) {
                throw LoadError(path.string(), lineno, e.what());
            }
        }
    };
    read(dir / "truth_ks.csv", [&](const std::vector<std::string>& f) {
        if (f.size() != 3) throw ContractError("expected 3 columns");
        truth.set_mastery(std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]) != 0);
    });
    read(dir / "truth_kus.csv", [&](const std::vector<std::string>& f) {
        if (f.size() != 5) throw ContractError("expected 5 columns");
        const RelationKind kind = csv::trim(f[3]) == "prereq" ? RelationKind::Prerequisite : RelationKind::Dependency;
        const Edge e{std::stoi(f[1]), std::stoi(f[2])};
        const auto& edges = graph.edges(kind);
        const auto it = std::find(edges.begin(), edges.end(), e);
        if (it == edges.end()) throw IndexError("edge not in graph");
        truth.set_understanding(std::stoi(f[0]), kind, static_cast<int>(it - edges.begin()), std::stoi(f[4]) != 0);
    });
    return truth;
}

RecoveryScore recovery_score(std::span<const CognitiveDiagnosis> diagnoses, const GroundTruth& truth) {
    std::vector<double> ks_pred, kus_pred;
    std::vector<int> ks_bits, kus_bits;
    std::size_t defects = 0, defects_low = 0;
    for (const CognitiveDiagnosis& d : diagnoses) {
        if (static_cast<int>(d.ks.size()) != truth.concepts()) throw DimensionError("recovery_score: KS length differs from K");
        for (int k = 0; k < truth.concepts(); ++k) {
            ks_pred.push_back(d.ks[static_cast<std::size_t>(k)]);
            ks_bits.push_back(truth.masters(d.learner, k) ? 1 : 0);
        }
        if (static_cast<int>(d.kus.size()) != truth.edge_slots()) throw DimensionError("recovery_score: KUS length differs from edge count");
        std::vector<int> bits;
        int pre_index = 0, dep_index = 0;
        for (const KusScore& s : d.kus) {
            const int idx = s.kind == RelationKind::Prerequisite ? pre_index++ : dep_index++;
            bits.push_back(truth.understands(d.learner, s.kind, idx) ? 1 : 0);
            kus_pred.push_back(s.score);
            kus_bits.push_back(bits.back());
        }
        if (d.kus.empty()) continue;
        std::vector<std::size_t> order(d.kus.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d.kus[a].score < d.kus[b].score; });
        const std::size_t cutoff = (d.kus.size() + 4) / 5;
        for (std::size_t r = 0; r < order.size(); ++r) {
            if (bits[order[r]] == 0) {
                ++defects;
                if (r < cutoff) ++defects_low;
            }
        }
    }
    RecoveryScore out;
    out.ks_auc = auc(ks_pred, ks_bits);
    out.kus_auc = auc(kus_pred, kus_bits);
    out.defect_lowest_quintile = defects == 0 ? 0.0 : static_cast<double>(defects_low) / static_cast<double>(defects);
    return out;
}

} // namespace cscd
