#ifndef CSCD_GRAPH_ATTENTION_HPP
#define CSCD_GRAPH_ATTENTION_HPP

#include "cscd/dataset.hpp"
#include "cscd/tape.hpp"

#include <span>
#include <vector>

namespace cscd {

/// Index lists driving node attention, edge attention and edge-to-node
/// fusion for one relation kind.
///
/// Node attention entry j: target node node_target[j] attends to
/// node_source[j] through edge node_edge[j] (-1 for a self-loop, whose edge
/// feature is the zero vector).
///
/// Edge attention entry j: edge edge_target[j] attends to edge_source[j],
/// which shares node edge_shared[j] with it (-1 for self-inclusion, whose
/// shared-node feature is the zero vector). When two edges share both
/// endpoints the smaller node id is recorded.
///
/// Fusion entry j: edge incident_edge[j] contributes to node incident_node[j].
/// Prerequisite edges contribute to their destination only; dependency edges
/// to both endpoints.
struct LineNeighborhood {
    RelationKind kind = RelationKind::Prerequisite;
    int node_count = 0;
    int edge_count = 0;
    bool self_loops = true;

    std::vector<int> node_target, node_source, node_edge;
    std::vector<int> edge_target, edge_source, edge_shared;
    std::vector<int> incident_node, incident_edge;

    static LineNeighborhood build(const ConceptGraph& graph, RelationKind kind, bool self_loops = true);

    /// Block-diagonal copy for `copies` independent learners; copy u offsets
    /// nodes by u*node_count and edges by u*edge_count.
    LineNeighborhood replicate(int copies) const;

    /// Throws EmptyNeighborhoodError when some node has no attention entry.
    void require_node_neighbors() const;
    /// Throws EmptyNeighborhoodError when some edge has no attention entry.
    void require_edge_neighbors() const;
};

struct AttentionResult {
    Var features; ///< updated features, one row per target
    Var weights;  ///< attention weight per entry, [entries x 1]
};

/// One node attention block:
///   a_{j->i} = softmax_{j in N_i} LeakyReLU(attn^T [h_i ; h_j ; r_{j->i}])
///   h'_i     = sigmoid(sum_j a_{j->i} h_j)
AttentionResult node_attention(Var nodes, Var edges, const LineNeighborhood& hood, Var attn, double slope);

/// One edge attention block:
///   b_{q->p} = softmax_{q in N_p} LeakyReLU(attn^T [r_p ; r_q ; h_{shared(p,q)}])
///   r'_p     = sigmoid(sum_q b_{q->p} r_q)
AttentionResult edge_attention(Var edges, Var nodes, const LineNeighborhood& hood, Var attn, double slope);

struct LayerAttention {
    Var node_attn; ///< [3d x 1]
    Var edge_attn; ///< [3d x 1]
};

struct ChannelOutput {
    Var nodes;
    Var edges;
};

/// Stacks one EGAT layer per entry of `layers`. Both blocks of a layer read
/// that layer's inputs. With update_nodes false the node block is skipped and
/// node features stay at their inputs. A kind without edges passes through.
ChannelOutput run_channel(Var nodes, Var edges, const LineNeighborhood& hood, std::span<const LayerAttention> layers,
                          double slope, bool update_nodes = true);

} // namespace cscd

#endif
