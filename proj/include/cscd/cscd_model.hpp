#ifndef CSCD_CSCD_MODEL_HPP
#define CSCD_CSCD_MODEL_HPP

#include "cscd/diagnosis.hpp"
#include "cscd/embedding.hpp"
#include "cscd/fusion.hpp"
#include "cscd/graph_attention.hpp"
#include "cscd/prediction.hpp"
#include "cscd/response_model.hpp"

#include <string>
#include <vector>

namespace cscd {

/// Which parts of the structure-state layer are active.
///   KnowledgeOnly ("K"): no attention layers; fusion sees personalized concept
///                         vectors and zero edge sums.
///   RelationOnly  ("R"): node features frozen at their personalized
///                         embeddings; edge attention and edge fusion active.
///   Full          ("K+R"): both.
enum class Ablation { KnowledgeOnly, RelationOnly, Full };

const char* to_string(Ablation mode);
Ablation parse_ablation(const std::string& text);

struct ModelConfig {
    int dim = 32;
    int layers = 1;
    int hidden1 = 512;
    int hidden2 = 256;
    double leaky_slope = 0.2;
    bool self_loops = true;
    bool monotone_head = false;
    Ablation ablation = Ablation::Full;
};

/// Intermediate results for a block of learners.
struct LearnerBlockState {
    Var ks;           ///< [U x K]
    Var structure;    ///< h^s, [(U*K) x d]
    Var prereq_edges; ///< channel output edge features, [(U*P) x d]
    Var dep_edges;    ///< [(U*D) x d]
    Var prereq_nodes; ///< channel output node features, [(U*K) x d]
    Var dep_nodes;
};

/// Full model: personalized embeddings -> directed and undirected EGAT
/// channels -> two-stage fusion -> KS projection -> interaction -> head.
class CscdModel final : public ResponseModel {
public:
    CscdModel(ConceptGraph graph, QMatrix qmatrix, int learner_count, const ModelConfig& config);

    std::string kind() const override { return "cscd"; }
    void add_parameters(ParameterStore& store) const override;
    Var forward(Tape& tape, ParameterStore& store, std::span<const Response> batch, double dropout,
                Rng* rng) const override;
    void after_update(ParameterStore& store) const override;

    LearnerBlockState learner_block(Tape& tape, ParameterStore& store, std::span<const int> learners) const;

    CognitiveDiagnosis diagnose(ParameterStore& store, int learner) const;

    const ConceptGraph& graph() const noexcept { return graph_; }
    const QMatrix& qmatrix() const noexcept { return qmatrix_; }
    const ModelConfig& config() const noexcept { return config_; }
    const Embedding& embedding() const noexcept { return embedding_; }
    const PredictionHead& head() const noexcept { return head_; }
    int learner_count() const noexcept { return embedding_.dims().learners; }
    const LineNeighborhood& neighborhood(RelationKind kind) const {
        return kind == RelationKind::Prerequisite ? prereq_hood_ : dep_hood_;
    }
    /// Notes raised at construction (e.g. a relation kind without edges).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    std::vector<LayerAttention> layer_attention(Tape& tape, ParameterStore& store, RelationKind kind) const;
    ChannelFusionWeights channel_weights(Tape& tape, ParameterStore& store, RelationKind kind) const;

    ConceptGraph graph_;
    QMatrix qmatrix_;
    ModelConfig config_;
    Embedding embedding_;
    PredictionHead head_;
    LineNeighborhood prereq_hood_;
    LineNeighborhood dep_hood_;
    std::vector<std::string> warnings_;
};

} // namespace cscd

#endif
