#include "cscd/grad_check.hpp"

#include "cscd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cscd {
namespace {

double evaluate(const ScalarObjective& objective) {
    Tape tape;
    const double v = objective(tape).value()[0];
    if (!std::isfinite(v)) throw NumericalError("grad_check: objective is not finite");
    return v;
}

} // namespace

GradCheckReport grad_check(ParameterStore& params, const ScalarObjective& objective, double eps, double abs_floor) {
    if (!params.all_finite()) throw NumericalError("grad_check: parameters contain non-finite values");
    params.zero_grad();
    {
        Tape tape;
        Var out = objective(tape);
        if (!std::isfinite(out.value()[0])) throw NumericalError("grad_check: objective is not finite");
        tape.backward(out);
    }

    GradCheckReport report;
    for (Parameter& p : params) {
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double original = p.value[i];
            p.value[i] = original + eps;
            const double up = evaluate(objective);
            p.value[i] = original - eps;
            const double down = evaluate(objective);
            p.value[i] = original;

            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = p.grad[i];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
            const double rel = std::abs(analytic - numeric) / denom;
            ++report.coordinates;
            if (rel > report.max_relative_error || report.worst_parameter.empty()) {
                report.max_relative_error = std::max(rel, report.max_relative_error);
                report.worst_parameter = p.name;
                report.worst_index = i;
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

} // namespace cscd
