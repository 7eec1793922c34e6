#ifndef CSCD_PARAMETERS_HPP
#define CSCD_PARAMETERS_HPP

#include "cscd/array.hpp"

#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace cscd {

enum class ParamRole { Weight, Bias };

/// A trainable array plus its gradient slot.
struct Parameter {
    std::string name;
    ParamRole role = ParamRole::Weight;
    Array value;
    Array grad;
};

/// Ordered collection of named parameters. References returned by add() and
/// at() stay valid for the lifetime of the store.
class ParameterStore {
public:
    Parameter& add(const std::string& name, Array value, ParamRole role = ParamRole::Weight);

    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t size() const noexcept { return params_.size(); }
    std::size_t scalar_count() const noexcept;

    auto begin() noexcept { return params_.begin(); }
    auto end() noexcept { return params_.end(); }
    auto begin() const noexcept { return params_.begin(); }
    auto end() const noexcept { return params_.end(); }

    void zero_grad();
    bool all_finite() const;

    /// Deep copy of all values, in insertion order.
    std::vector<Array> snapshot() const;
    void restore(const std::vector<Array>& values);

private:
    std::deque<Parameter> params_;
    std::map<std::string, std::size_t> index_;
};

} // namespace cscd

#endif
