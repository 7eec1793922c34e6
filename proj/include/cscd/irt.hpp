#ifndef CSCD_IRT_HPP
#define CSCD_IRT_HPP

#include "cscd/response_model.hpp"

namespace cscd {

/// Two-parameter logistic baseline: p = sigmoid(a_e * (theta_s - b_e)).
///
/// Parameters: irt.theta [N x 1], irt.difficulty [M x 1], irt.discrimination [M x 1].
/// Discriminations start at 1; abilities and difficulties use Xavier draws.
class IrtModel final : public ResponseModel {
public:
    IrtModel(int learners, int exercises) : learners_(learners), exercises_(exercises) {}

    std::string kind() const override { return "irt"; }
    void add_parameters(ParameterStore& store) const override;
    void initialize(ParameterStore& store, Rng& rng) const override;
    Var forward(Tape& tape, ParameterStore& store, std::span<const Response> batch, double dropout,
                Rng* rng) const override;

    int learner_count() const noexcept { return learners_; }
    int exercise_count() const noexcept { return exercises_; }

private:
    int learners_;
    int exercises_;
};

} // namespace cscd

#endif
