#include "cscd/fusion.hpp"

#include "cscd/errors.hpp"
#include "cscd/ops.hpp"

namespace cscd {

ChannelFusion fuse_channel(Var nodes, Var edges, const LineNeighborhood& hood, const ChannelFusionWeights& weights,
                           bool use_edges) {
    Tape& tape = *nodes.tape;
    const std::size_t n = nodes.rows();
    const std::size_t d = nodes.cols();
    if (n != static_cast<std::size_t>(hood.node_count)) throw DimensionError("fuse_channel: node count mismatch");

    Var summed;
    Var edge_weights = tape.constant(Array(0, 1));
    if (use_edges && hood.edge_count > 0) {
        if (edges.rows() != static_cast<std::size_t>(hood.edge_count)) throw DimensionError("fuse_channel: edge count mismatch");
        edge_weights = ops::sigmoid(ops::linear(edges, weights.edge_weight_w, weights.edge_weight_b));
        Var weighted = ops::mul_rowwise(ops::gather_rows(edges, hood.incident_edge),
                                        ops::gather_rows(edge_weights, hood.incident_edge));
        summed = ops::segment_sum(weighted, hood.incident_node, n);
    } else {
        summed = tape.constant(Array(n, d));
    }
    Var state = ops::sigmoid(ops::linear(ops::concat({nodes, summed}), weights.w, weights.b));
    return {state, edge_weights};
}

Var fuse_final(Var dep_state, Var prereq_state, const FinalFusionWeights& weights) {
    Var dep_w = ops::linear(dep_state, weights.dep_channel_w, weights.dep_channel_b);
    Var pre_w = ops::linear(prereq_state, weights.prereq_channel_w, weights.prereq_channel_b);
    Var joined = ops::concat({ops::mul_rowwise(dep_state, dep_w), ops::mul_rowwise(prereq_state, pre_w)});
    return ops::sigmoid(ops::linear(joined, weights.w, weights.b));
}

Var project_scalar(Var x, Var projection) { return ops::sigmoid(ops::matmul(x, projection)); }

} // namespace cscd
