#include "cscd/cscd_model.hpp"

#include "cscd/errors.hpp"
#include "cscd/ops.hpp"

#include <algorithm>
#include <map>

namespace cscd {
namespace {

const char* kind_prefix(RelationKind kind) { return kind == RelationKind::Prerequisite ? "prereq" : "dep"; }

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

} // namespace

const char* to_string(Ablation mode) {
    switch (mode) {
    case Ablation::KnowledgeOnly: return "K";
    case Ablation::RelationOnly: return "R";
    case Ablation::Full: return "K+R";
    }
    return "K+R";
}

Ablation parse_ablation(const std::string& text) {
    if (text == "K") return Ablation::KnowledgeOnly;
    if (text == "R") return Ablation::RelationOnly;
    if (text == "K+R" || text == "KR") return Ablation::Full;
    throw ConfigError("unknown ablation mode '" + text + "' (expected K, R or K+R)");
}

CscdModel::CscdModel(ConceptGraph graph, QMatrix qmatrix, int learner_count, const ModelConfig& config)
    : graph_(std::move(graph)),
      qmatrix_(std::move(qmatrix)),
      config_(config),
      embedding_(EmbeddingDims{learner_count, qmatrix_.exercise_count(), graph_.concept_count(),
                               static_cast<int>(graph_.prerequisites().size()),
                               static_cast<int>(graph_.dependencies().size()), config.dim}),
      head_(HeadDims{graph_.concept_count(), config.hidden1, config.hidden2}) {
    if (config.dim <= 0 || config.layers < 0 || config.hidden1 <= 0 || config.hidden2 <= 0) {
        throw ConfigError("model dimensions must be positive (layers non-negative)");
    }
    if (!(config.leaky_slope > 0.0 && config.leaky_slope < 1.0)) throw ConfigError("LeakyReLU slope must lie in (0,1)");
    if (qmatrix_.concept_count() != graph_.concept_count()) throw DimensionError("Q-matrix and graph disagree on K");
    prereq_hood_ = LineNeighborhood::build(graph_, RelationKind::Prerequisite, config.self_loops);
    dep_hood_ = LineNeighborhood::build(graph_, RelationKind::Dependency, config.self_loops);
    for (const auto* hood : {&prereq_hood_, &dep_hood_}) {
        if (hood->edge_count == 0) {
            warnings_.push_back(std::string("no ") + to_string(hood->kind) +
                                " edges: that channel passes node features through unchanged");
        } else if (!config.self_loops) {
            hood->require_node_neighbors();
            hood->require_edge_neighbors();
        }
    }
}

void CscdModel::add_parameters(ParameterStore& store) const {
    embedding_.add_parameters(store);
    const std::size_t d = sz(config_.dim);
    for (RelationKind kind : {RelationKind::Prerequisite, RelationKind::Dependency}) {
        const std::string p = kind_prefix(kind);
        for (int l = 0; l < config_.layers; ++l) {
            store.add("egat." + p + "." + std::to_string(l) + ".node_attn", Array(3 * d, 1));
            store.add("egat." + p + "." + std::to_string(l) + ".edge_attn", Array(3 * d, 1));
        }
        store.add("fusion." + p + ".edge_weight.W", Array(1, d));
        store.add("fusion." + p + ".edge_weight.b", Array(1, 1), ParamRole::Bias);
        store.add("fusion." + p + ".W", Array(d, 2 * d));
        store.add("fusion." + p + ".b", Array(1, d), ParamRole::Bias);
        store.add("fusion." + p + ".channel_weight.W", Array(1, d));
        store.add("fusion." + p + ".channel_weight.b", Array(1, 1), ParamRole::Bias);
    }
    store.add("fusion.final.W", Array(d, 2 * d));
    store.add("fusion.final.b", Array(1, d), ParamRole::Bias);
    store.add("project.ks", Array(d, 1));
    store.add("project.kus", Array(d, 1));
    head_.add_parameters(store);
}

std::vector<LayerAttention> CscdModel::layer_attention(Tape& tape, ParameterStore& store, RelationKind kind) const {
    std::vector<LayerAttention> out;
    const std::string p = std::string("egat.") + kind_prefix(kind) + ".";
    for (int l = 0; l < config_.layers; ++l) {
        out.push_back({tape.parameter(store.at(p + std::to_string(l) + ".node_attn")),
                       tape.parameter(store.at(p + std::to_string(l) + ".edge_attn"))});
    }
    return out;
}

ChannelFusionWeights CscdModel::channel_weights(Tape& tape, ParameterStore& store, RelationKind kind) const {
    const std::string p = std::string("fusion.") + kind_prefix(kind) + ".";
    return {tape.parameter(store.at(p + "edge_weight.W")), tape.parameter(store.at(p + "edge_weight.b")),
            tape.parameter(store.at(p + "W")), tape.parameter(store.at(p + "b"))};
}

LearnerBlockState CscdModel::learner_block(Tape& tape, ParameterStore& store, std::span<const int> learners) const {
    const int u = static_cast<int>(learners.size());
    const PersonalizedGraphState state = embedding_.personalize(tape, store, learners);
    const bool use_edges = config_.ablation != Ablation::KnowledgeOnly;
    const bool update_nodes = config_.ablation != Ablation::RelationOnly;

    LearnerBlockState out;
    ChannelFusion fused[2];
    for (RelationKind kind : {RelationKind::Prerequisite, RelationKind::Dependency}) {
        const LineNeighborhood hood = neighborhood(kind).replicate(u);
        const Var edges = kind == RelationKind::Prerequisite ? state.prereq_edges : state.dep_edges;
        ChannelOutput channel{state.concepts, edges};
        if (use_edges) {
            const auto layers = layer_attention(tape, store, kind);
            channel = run_channel(state.concepts, edges, hood, layers, config_.leaky_slope, update_nodes);
        }
        fused[kind == RelationKind::Prerequisite ? 0 : 1] =
            fuse_channel(channel.nodes, channel.edges, hood, channel_weights(tape, store, kind), use_edges);
        if (kind == RelationKind::Prerequisite) {
            out.prereq_nodes = channel.nodes;
            out.prereq_edges = channel.edges;
        } else {
            out.dep_nodes = channel.nodes;
            out.dep_edges = channel.edges;
        }
    }
    const FinalFusionWeights final_w{tape.parameter(store.at("fusion.dep.channel_weight.W")),
                                     tape.parameter(store.at("fusion.dep.channel_weight.b")),
                                     tape.parameter(store.at("fusion.prereq.channel_weight.W")),
                                     tape.parameter(store.at("fusion.prereq.channel_weight.b")),
                                     tape.parameter(store.at("fusion.final.W")),
                                     tape.parameter(store.at("fusion.final.b"))};
    out.structure = fuse_final(fused[1].state, fused[0].state, final_w);
    Var ks = project_scalar(out.structure, tape.parameter(store.at("project.ks")));
    out.ks = ops::reshape(ks, sz(u), sz(graph_.concept_count()));
    return out;
}

Var CscdModel::forward(Tape& tape, ParameterStore& store, std::span<const Response> batch, double dropout,
                       Rng* rng) const {
    if (batch.empty()) throw DimensionError("forward: empty batch");
    std::vector<int> learners;
    learners.reserve(batch.size());
    for (const Response& r : batch) learners.push_back(r.learner);
    std::sort(learners.begin(), learners.end());
    learners.erase(std::unique(learners.begin(), learners.end()), learners.end());

    std::vector<int> slot(batch.size());
    std::vector<int> exercises(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        slot[i] = static_cast<int>(std::lower_bound(learners.begin(), learners.end(), batch[i].learner) - learners.begin());
        exercises[i] = batch[i].exercise;
    }

    const LearnerBlockState block = learner_block(tape, store, learners);
    const ExerciseFeatures ex = embedding_.exercise_features(tape, store, exercises, qmatrix_);
    Var x = interaction(ops::gather_rows(block.ks, slot), ex.difficulty, ex.discrimination, ex.qmask);
    return head_.predict(tape, store, x, dropout, rng);
}

void CscdModel::after_update(ParameterStore& store) const {
    if (config_.monotone_head) head_.clamp_monotone(store);
}

CognitiveDiagnosis CscdModel::diagnose(ParameterStore& store, int learner) const {
    Tape tape;
    const int ids[1] = {learner};
    const LearnerBlockState block = learner_block(tape, store, ids);
    CognitiveDiagnosis out;
    out.learner = learner;
    const Array& ks = block.ks.value();
    out.ks.assign(ks.values().begin(), ks.values().end());
    Var proj = tape.parameter(store.at("project.kus"));
    for (RelationKind kind : {RelationKind::Prerequisite, RelationKind::Dependency}) {
        const auto& edges = graph_.edges(kind);
        if (edges.empty()) continue;
        const Var feats = kind == RelationKind::Prerequisite ? block.prereq_edges : block.dep_edges;
        const Array& scores = project_scalar(feats, proj).value();
        for (std::size_t e = 0; e < edges.size(); ++e) out.kus.push_back({edges[e], kind, scores[e]});
    }
    return out;
}

} // namespace cscd
