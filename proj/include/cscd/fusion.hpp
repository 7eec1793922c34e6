#ifndef CSCD_FUSION_HPP
#define CSCD_FUSION_HPP

#include "cscd/graph_attention.hpp"
#include "cscd/tape.hpp"

namespace cscd {

/// Weights that turn one channel's node and edge features into a per-concept
/// structure state.
struct ChannelFusionWeights {
    Var edge_weight_w; ///< [1 x d] edge -> scalar weight, sigmoid output
    Var edge_weight_b; ///< [1 x 1]
    Var w;             ///< [d x 2d]
    Var b;             ///< [1 x d]
};

struct ChannelFusion {
    Var state;        ///< [nodes x d]
    Var edge_weights; ///< [edges x 1], empty when the channel has no edges
};

/// For each node i: s_i = sum over incident edges e of w_e * edge_e with
/// w_e = sigmoid(edge_weight_w . edge_e + edge_weight_b); then
/// sigmoid(W [node_i ; s_i] + b). Nodes without incident edges use s_i = 0.
/// With use_edges false every s_i is zero.
ChannelFusion fuse_channel(Var nodes, Var edges, const LineNeighborhood& hood, const ChannelFusionWeights& weights,
                           bool use_edges = true);

struct FinalFusionWeights {
    Var dep_channel_w;    ///< [1 x d] linear channel weight for the dependency channel
    Var dep_channel_b;    ///< [1 x 1]
    Var prereq_channel_w; ///< [1 x d]
    Var prereq_channel_b; ///< [1 x 1]
    Var w;                ///< [d x 2d]
    Var b;                ///< [1 x d]
};

/// h^s_i = sigmoid(W [w_dep,i * dep_i ; w_pre,i * pre_i] + b) where the
/// per-concept channel weights are linear in the channel state.
Var fuse_final(Var dep_state, Var prereq_state, const FinalFusionWeights& weights);

/// sigmoid(x . projection) per row; projection is [d x 1].
Var project_scalar(Var x, Var projection);

} // namespace cscd

#endif
