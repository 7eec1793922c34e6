#ifndef CSCD_TAPE_HPP
#define CSCD_TAPE_HPP

#include "cscd/array.hpp"
#include "cscd/parameters.hpp"

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

namespace cscd {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    const Array& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

/// Linear record of primitive operations for one forward trace.
///
/// backward() walks the records in exact reverse order of creation, so a fixed
/// forward trace always yields bit-identical gradients. Parameter leaves read
/// the parameter's value in place and accumulate directly into its gradient.
class Tape {
public:
    /// Receives the gradient of the node's output; pushes into operand grads.
    using Backward = std::function<void(Tape&, const Array& out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Array value);
    /// Leaf bound to `p`; repeated calls for the same parameter return the same leaf.
    Var parameter(Parameter& p);
    /// Records a derived value. `needs_grad` false makes the node a constant.
    Var record(Array value, bool needs_grad, Backward backward);

    const Array& value(Var v) const {
        const Node& n = nodes_[v.id];
        return n.param ? n.param->value : n.value;
    }
    bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
    /// Gradient buffer of `v`, allocated as zeros on first access.
    Array& grad(Var v);
    bool has_grad(Var v) const {
        const Node& n = nodes_[v.id];
        return n.param != nullptr || !n.grad.empty() || n.value.empty();
    }

    /// Seeds d(output)/d(output) = 1 for a 1x1 output and runs the reverse sweep.
    void backward(Var output);

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Array value;
        Array grad;
        bool needs_grad = false;
        Backward backward;
        Parameter* param = nullptr;
    };

    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, std::uint32_t> param_leaves_;
};

inline const Array& Var::value() const { return tape->value(*this); }

} // namespace cscd

#endif
