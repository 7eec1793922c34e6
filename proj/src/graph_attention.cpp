#include "cscd/graph_attention.hpp"

#include "cscd/errors.hpp"
#include "cscd/ops.hpp"

#include <algorithm>

namespace cscd {

LineNeighborhood LineNeighborhood::build(const ConceptGraph& graph, RelationKind kind, bool self_loops) {
    LineNeighborhood h;
    h.kind = kind;
    h.node_count = graph.concept_count();
    h.self_loops = self_loops;
    const std::vector<Edge>& edges = graph.edges(kind);
    h.edge_count = static_cast<int>(edges.size());

    // Node attention, grouped by target.
    std::vector<std::vector<std::pair<int, int>>> in(static_cast<std::size_t>(h.node_count));
    for (int e = 0; e < h.edge_count; ++e) {
        const Edge& ed = edges[static_cast<std::size_t>(e)];
        in[static_cast<std::size_t>(ed.dst)].emplace_back(ed.src, e);
        if (kind == RelationKind::Dependency) in[static_cast<std::size_t>(ed.src)].emplace_back(ed.dst, e);
    }
    for (int i = 0; i < h.node_count; ++i) {
        if (self_loops) {
            h.node_target.push_back(i);
            h.node_source.push_back(i);
            h.node_edge.push_back(-1);
        }
        for (auto [src, e] : in[static_cast<std::size_t>(i)]) {
            h.node_target.push_back(i);
            h.node_source.push_back(src);
            h.node_edge.push_back(e);
        }
    }

    // Edge attention over the line graph: edges sharing any endpoint.
    std::vector<std::vector<int>> touching(static_cast<std::size_t>(h.node_count));
    for (int e = 0; e < h.edge_count; ++e) {
        touching[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].src)].push_back(e);
        touching[static_cast<std::size_t>(edges[static_cast<std::size_t>(e)].dst)].push_back(e);
    }
    for (int p = 0; p < h.edge_count; ++p) {
        if (self_loops) {
            h.edge_target.push_back(p);
            h.edge_source.push_back(p);
            h.edge_shared.push_back(-1);
        }
        const Edge& ep = edges[static_cast<std::size_t>(p)];
        std::vector<std::pair<int, int>> nbrs; // (edge, shared node)
        for (int node : {std::min(ep.src, ep.dst), std::max(ep.src, ep.dst)}) {
            for (int q : touching[static_cast<std::size_t>(node)]) {
                if (q == p) continue;
                if (std::any_of(nbrs.begin(), nbrs.end(), [q](auto pr) { return pr.first == q; })) continue;
                nbrs.emplace_back(q, node);
            }
        }
        std::sort(nbrs.begin(), nbrs.end());
        for (auto [q, node] : nbrs) {
            h.edge_target.push_back(p);
            h.edge_source.push_back(q);
            h.edge_shared.push_back(node);
        }
    }

    for (int e = 0; e < h.edge_count; ++e) {
        const Edge& ed = edges[static_cast<std::size_t>(e)];
        if (kind == RelationKind::Dependency) {
            h.incident_node.push_back(ed.src);
            h.incident_edge.push_back(e);
        }
        h.incident_node.push_back(ed.dst);
        h.incident_edge.push_back(e);
    }
    return h;
}

LineNeighborhood LineNeighborhood::replicate(int copies) const {
    LineNeighborhood out;
    out.kind = kind;
    out.node_count = node_count * copies;
    out.edge_count = edge_count * copies;
    out.self_loops = self_loops;
    auto shift = [copies](const std::vector<int>& v, std::vector<int>& dst, int stride) {
        dst.reserve(v.size() * static_cast<std::size_t>(copies));
        for (int u = 0; u < copies; ++u)
            for (int x : v) dst.push_back(x < 0 ? -1 : x + u * stride);
    };
    shift(node_target, out.node_target, node_count);
    shift(node_source, out.node_source, node_count);
    shift(node_edge, out.node_edge, edge_count);
    shift(edge_target, out.edge_target, edge_count);
    shift(edge_source, out.edge_source, edge_count);
    shift(edge_shared, out.edge_shared, node_count);
    shift(incident_node, out.incident_node, node_count);
    shift(incident_edge, out.incident_edge, edge_count);
    return out;
}

namespace {

void require_covered(const std::vector<int>& targets, int count, const char* what) {
    std::vector<char> seen(static_cast<std::size_t>(count), 0);
    for (int t : targets) seen[static_cast<std::size_t>(t)] = 1;
    for (int i = 0; i < count; ++i) {
        if (!seen[static_cast<std::size_t>(i)]) {
            throw EmptyNeighborhoodError(std::string(what) + " " + std::to_string(i) +
                                         " has an empty attention neighborhood (self-loops disabled)");
        }
    }
}

AttentionResult attend(Var self_feats, Var other_feats, std::span<const int> target, std::span<const int> source,
                       std::span<const int> via, Var attn, double slope, std::size_t target_count) {
    const std::size_t d = self_feats.cols();
    if (attn.rows() != 3 * d || attn.cols() != 1) {
        throw DimensionError("attention vector must be [" + std::to_string(3 * d) + "x1], got " +
                             attn.value().shape_string());
    }
    Var keys = ops::concat({ops::gather_rows(self_feats, target), ops::gather_rows(self_feats, source),
                            ops::gather_rows(other_feats, via)});
    Var scores = ops::leaky_relu(ops::matmul(keys, attn), slope);
    Var weights = ops::segment_softmax(scores, target, target_count);
    Var messages = ops::mul_rowwise(ops::gather_rows(self_feats, source), weights);
    return {ops::sigmoid(ops::segment_sum(messages, target, target_count)), weights};
}

} // namespace

void LineNeighborhood::require_node_neighbors() const { require_covered(node_target, node_count, "node"); }

void LineNeighborhood::require_edge_neighbors() const { require_covered(edge_target, edge_count, "edge"); }

AttentionResult node_attention(Var nodes, Var edges, const LineNeighborhood& hood, Var attn, double slope) {
    if (nodes.rows() != static_cast<std::size_t>(hood.node_count) || edges.rows() != static_cast<std::size_t>(hood.edge_count)) {
        throw DimensionError("node_attention: features do not match the neighborhood");
    }
    if (!hood.self_loops) hood.require_node_neighbors();
    return attend(nodes, edges, hood.node_target, hood.node_source, hood.node_edge, attn, slope,
                  static_cast<std::size_t>(hood.node_count));
}

AttentionResult edge_attention(Var edges, Var nodes, const LineNeighborhood& hood, Var attn, double slope) {
    if (nodes.rows() != static_cast<std::size_t>(hood.node_count) || edges.rows() != static_cast<std::size_t>(hood.edge_count)) {
        throw DimensionError("edge_attention: features do not match the neighborhood");
    }
    if (!hood.self_loops) hood.require_edge_neighbors();
    return attend(edges, nodes, hood.edge_target, hood.edge_source, hood.edge_shared, attn, slope,
                  static_cast<std::size_t>(hood.edge_count));
}

ChannelOutput run_channel(Var nodes, Var edges, const LineNeighborhood& hood, std::span<const LayerAttention> layers,
                          double slope, bool update_nodes) {
    if (hood.edge_count == 0) return {nodes, edges};
    for (const LayerAttention& layer : layers) {
        Var next_edges = edge_attention(edges, nodes, hood, layer.edge_attn, slope).features;
        if (update_nodes) nodes = node_attention(nodes, edges, hood, layer.node_attn, slope).features;
        edges = next_edges;
    }
    return {nodes, edges};
}

} // namespace cscd
