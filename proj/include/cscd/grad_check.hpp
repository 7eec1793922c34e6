#ifndef CSCD_GRAD_CHECK_HPP
#define CSCD_GRAD_CHECK_HPP

#include "cscd/parameters.hpp"
#include "cscd/tape.hpp"

#include <functional>
#include <string>

namespace cscd {

/// Builds a scalar (1x1) loss on the given tape from parameters of the store
/// the check runs against.
using ScalarObjective = std::function<Var(Tape&)>;

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t coordinates = 0;
};

/// Compares tape gradients with central differences (f(x+eps)-f(x-eps))/(2 eps)
/// over every coordinate of every parameter. The relative error of one
/// coordinate is |a - n| / max(|a|, |n|, abs_floor); the floor keeps exact
/// zeros from dividing by zero.
GradCheckReport grad_check(ParameterStore& params, const ScalarObjective& objective, double eps = 1e-5,
                           double abs_floor = 1e-8);

} // namespace cscd

#endif
