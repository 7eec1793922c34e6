#include "cscd/tape.hpp"

#include "cscd/errors.hpp"

namespace cscd {

Var Tape::constant(Array value) {
    nodes_.push_back(Node{std::move(value), {}, false, {}, nullptr});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(Parameter& p) {
    if (auto it = param_leaves_.find(&p); it != param_leaves_.end()) return Var{this, it->second};
    if (!p.grad.same_shape(p.value)) p.grad = Array(p.value.rows(), p.value.cols());
    nodes_.push_back(Node{Array(), {}, true, {}, &p});
    const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
    param_leaves_.emplace(&p, id);
    return Var{this, id};
}

Var Tape::record(Array value, bool needs_grad, Backward backward) {
    nodes_.push_back(Node{std::move(value), {}, needs_grad, needs_grad ? std::move(backward) : Backward{}, nullptr});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Array& Tape::grad(Var v) {
    Node& n = nodes_[v.id];
    if (n.param != nullptr) return n.param->grad;
    if (n.grad.empty() && !n.value.empty()) n.grad = Array(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::backward(Var output) {
    const Array& out = value(output);
    if (nodes_[output.id].param != nullptr) throw ContractError("backward: output must be a derived value");
    if (out.rows() != 1 || out.cols() != 1) {
        throw DimensionError("backward: output must be 1x1, got " + out.shape_string());
    }
    if (!nodes_[output.id].needs_grad) return;
    grad(output)[0] = 1.0;
    for (std::size_t i = output.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.param != nullptr || n.grad.empty()) continue;
        if (n.backward) n.backward(*this, n.grad);
    }
}

} // namespace cscd
