#include "cscd/prediction.hpp"

#include "cscd/errors.hpp"
#include "cscd/ops.hpp"
#include "cscd/rng.hpp"

#include <algorithm>

namespace cscd {

Var interaction(Var ks, Var difficulty, Var discrimination, Var qmask) {
    if (!ks.value().same_shape(difficulty.value()) || !ks.value().same_shape(qmask.value()) ||
        discrimination.cols() != 1 || discrimination.rows() != ks.rows()) {
        throw DimensionError("interaction: ks " + ks.value().shape_string() + ", difficulty " +
                             difficulty.value().shape_string() + ", discrimination " +
                             discrimination.value().shape_string() + ", Q " + qmask.value().shape_string());
    }
    return ops::mul(qmask, ops::mul_rowwise(ops::sub(ks, difficulty), discrimination));
}

void PredictionHead::add_parameters(ParameterStore& store) const {
    auto sz = [](int v) { return static_cast<std::size_t>(v); };
    store.add("head.W1", Array(sz(dims_.hidden1), sz(dims_.concepts)));
    store.add("head.b1", Array(1, sz(dims_.hidden1)), ParamRole::Bias);
    store.add("head.W2", Array(sz(dims_.hidden2), sz(dims_.hidden1)));
    store.add("head.b2", Array(1, sz(dims_.hidden2)), ParamRole::Bias);
    store.add("head.W3", Array(1, sz(dims_.hidden2)));
    store.add("head.b3", Array(1, 1), ParamRole::Bias);
}

Var PredictionHead::predict(Tape& tape, ParameterStore& store, Var x, double dropout_rate, Rng* rng) const {
    auto layer = [&](Var in, const char* w, const char* b) {
        return ops::sigmoid(ops::linear(in, tape.parameter(store.at(w)), tape.parameter(store.at(b))));
    };
    Var x1 = layer(x, "head.W1", "head.b1");
    if (rng != nullptr) x1 = ops::dropout(x1, dropout_rate, *rng);
    Var x2 = layer(x1, "head.W2", "head.b2");
    if (rng != nullptr) x2 = ops::dropout(x2, dropout_rate, *rng);
    return layer(x2, "head.W3", "head.b3");
}

void PredictionHead::clamp_monotone(ParameterStore& store) const {
    for (const char* name : {"head.W1", "head.W2", "head.W3"}) {
        for (double& v : store.at(name).value.values()) v = std::max(v, 0.0);
    }
}

Var response_loss(Var predictions, std::span<const double> labels) { return ops::bce_loss(predictions, labels); }

} // namespace cscd
