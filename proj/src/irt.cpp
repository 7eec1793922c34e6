#include "cscd/irt.hpp"

#include "cscd/errors.hpp"
#include "cscd/ops.hpp"

#include <vector>

namespace cscd {

void IrtModel::add_parameters(ParameterStore& store) const {
    store.add("irt.theta", Array(static_cast<std::size_t>(learners_), 1));
    store.add("irt.difficulty", Array(static_cast<std::size_t>(exercises_), 1));
    store.add("irt.discrimination", Array(static_cast<std::size_t>(exercises_), 1));
}

void IrtModel::initialize(ParameterStore& store, Rng& rng) const {
    xavier_initialize(store, rng);
    store.at("irt.discrimination").value.fill(1.0);
}

Var IrtModel::forward(Tape& tape, ParameterStore& store, std::span<const Response> batch, double, Rng*) const {
    std::vector<int> learners, exercises;
    learners.reserve(batch.size());
    exercises.reserve(batch.size());
    for (const Response& r : batch) {
        if (r.learner < 0 || r.learner >= learners_) throw IndexError("irt: learner " + std::to_string(r.learner) + " out of range");
        if (r.exercise < 0 || r.exercise >= exercises_) throw IndexError("irt: exercise " + std::to_string(r.exercise) + " out of range");
        learners.push_back(r.learner);
        exercises.push_back(r.exercise);
    }
    Var theta = ops::gather_rows(tape.parameter(store.at("irt.theta")), learners);
    Var b = ops::gather_rows(tape.parameter(store.at("irt.difficulty")), exercises);
    Var a = ops::gather_rows(tape.parameter(store.at("irt.discrimination")), exercises);
    return ops::sigmoid(ops::mul(a, ops::sub(theta, b)));
}

} // namespace cscd
