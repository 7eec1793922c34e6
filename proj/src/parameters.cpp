#include "cscd/parameters.hpp"

#include "cscd/errors.hpp"

namespace cscd {

Parameter& ParameterStore::add(const std::string& name, Array value, ParamRole role) {
    if (contains(name)) throw ConfigError("duplicate parameter name: " + name);
    index_.emplace(name, params_.size());
    Array grad(value.rows(), value.cols());
    params_.push_back(Parameter{name, role, std::move(value), std::move(grad)});
    return params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw IndexError("unknown parameter: " + name);
    return params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw IndexError("unknown parameter: " + name);
    return params_[it->second];
}

std::size_t ParameterStore::scalar_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
}

void ParameterStore::zero_grad() {
    for (auto& p : params_) p.grad.fill(0.0);
}

bool ParameterStore::all_finite() const {
    for (const auto& p : params_) {
        if (!p.value.all_finite()) return false;
    }
    return true;
}

std::vector<Array> ParameterStore::snapshot() const {
    std::vector<Array> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.value);
    return out;
}

void ParameterStore::restore(const std::vector<Array>& values) {
    if (values.size() != params_.size()) throw DimensionError("restore: parameter count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].same_shape(params_[i].value)) {
            throw DimensionError("restore: shape mismatch for " + params_[i].name);
        }
        params_[i].value = values[i];
    }
}

} // namespace cscd
