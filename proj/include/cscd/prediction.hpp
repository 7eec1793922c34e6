#ifndef CSCD_PREDICTION_HPP
#define CSCD_PREDICTION_HPP

#include "cscd/parameters.hpp"
#include "cscd/tape.hpp"

#include <span>

namespace cscd {

class Rng;

/// x = Q_e * (ks - difficulty) * discrimination, row by row.
/// ks, difficulty and qmask are [B x K]; discrimination is [B x 1].
Var interaction(Var ks, Var difficulty, Var discrimination, Var qmask);

struct HeadDims {
    int concepts = 0;
    int hidden1 = 512;
    int hidden2 = 256;
};

/// Three sigmoid layers K -> hidden1 -> hidden2 -> 1 with inverted dropout
/// after each hidden activation (training only).
///
/// Parameters: head.W1 [h1 x K], head.b1, head.W2 [h2 x h1], head.b2,
/// head.W3 [1 x h2], head.b3.
class PredictionHead {
public:
    explicit PredictionHead(const HeadDims& dims) : dims_(dims) {}

    const HeadDims& dims() const noexcept { return dims_; }
    void add_parameters(ParameterStore& store) const;

    /// Probability of a correct answer per row of x, [B x 1]. Pass rng only
    /// in training mode; dropout is skipped when rng is null.
    Var predict(Tape& tape, ParameterStore& store, Var x, double dropout_rate, Rng* rng) const;

    /// Clamps head weights to be non-negative (monotone head option).
    void clamp_monotone(ParameterStore& store) const;

private:
    HeadDims dims_;
};

/// Mean binary cross-entropy with log clamping.
Var response_loss(Var predictions, std::span<const double> labels);

} // namespace cscd

#endif
