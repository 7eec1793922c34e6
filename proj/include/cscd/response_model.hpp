#ifndef CSCD_RESPONSE_MODEL_HPP
#define CSCD_RESPONSE_MODEL_HPP

#include "cscd/dataset.hpp"
#include "cscd/parameters.hpp"
#include "cscd/tape.hpp"

#include <span>
#include <string>
#include <vector>

namespace cscd {

class Rng;

/// Anything the trainer can fit: maps (learner, exercise) pairs to a
/// probability of a correct answer.
class ResponseModel {
public:
    virtual ~ResponseModel() = default;

    /// Short model identifier written to checkpoints and reports.
    virtual std::string kind() const = 0;
    virtual void add_parameters(ParameterStore& store) const = 0;
    /// Xavier-uniform weights and zero biases by default.
    virtual void initialize(ParameterStore& store, Rng& rng) const;
    /// Probabilities [B x 1]. A non-null rng selects training mode (dropout on).
    virtual Var forward(Tape& tape, ParameterStore& store, std::span<const Response> batch, double dropout,
                        Rng* rng) const = 0;
    /// Hook run after every optimizer step.
    virtual void after_update(ParameterStore&) const {}

    /// Evaluation-mode probabilities, computed in chunks of `chunk` responses.
    std::vector<double> predict(ParameterStore& store, std::span<const Response> responses, std::size_t chunk = 512) const;
};

/// Xavier-uniform initialization: every Weight-role array of shape r x c is
/// drawn from U(-sqrt(6/(r+c)), +sqrt(6/(r+c))); Bias-role arrays are zeroed.
void xavier_initialize(ParameterStore& store, Rng& rng);

} // namespace cscd

#endif
