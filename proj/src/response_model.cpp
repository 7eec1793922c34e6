#include "cscd/response_model.hpp"

#include "cscd/rng.hpp"

#include <algorithm>
#include <cmath>

namespace cscd {

void xavier_initialize(ParameterStore& store, Rng& rng) {
    for (Parameter& p : store) {
        if (p.role == ParamRole::Bias) {
            p.value.fill(0.0);
            continue;
        }
        const double bound = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
        for (double& v : p.value.values()) v = rng.uniform(-bound, bound);
    }
}

void ResponseModel::initialize(ParameterStore& store, Rng& rng) const { xavier_initialize(store, rng); }

std::vector<double> ResponseModel::predict(ParameterStore& store, std::span<const Response> responses,
                                           std::size_t chunk) const {
    std::vector<double> out;
    out.reserve(responses.size());
    for (std::size_t start = 0; start < responses.size(); start += chunk) {
        const std::size_t n = std::min(chunk, responses.size() - start);
        Tape tape;
        Var p = forward(tape, store, responses.subspan(start, n), 0.0, nullptr);
        for (std::size_t i = 0; i < n; ++i) out.push_back(p.value()[i]);
    }
    return out;
}

} // namespace cscd
