#include "cscd/errors.hpp"
#include "cscd/grad_check.hpp"
#include "cscd/ops.hpp"
#include "cscd/prediction.hpp"
#include "model_fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cscd;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Array interact(const Array& ks, const Array& diff, double disc, const Array& q) {
    Tape t;
    return interaction(t.constant(ks), t.constant(diff), t.constant(Array(1, 1, disc)), t.constant(q)).value();
}

} // namespace

TEST_CASE("interaction examples") {
    Array ks = Array::row({0.3, 0.8, 0.5});
    CHECK(max_abs_diff(interact(ks, ks, 0.7, Array::row({1, 1, 1})), Array(1, 3)) == 0.0);

    Array masked = interact(Array::row({0.9, 0.1, 0.4}), Array::row({0.2, 0.2, 0.2}), 0.9, Array::row({1, 0, 1}));
    CHECK(masked[1] == 0.0);

    Array x = interact(Array::row({0.9, 0.2}), Array::row({0.5, 0.5}), 0.5, Array::row({1, 1}));
    CHECK(std::abs(x[0] - 0.2) < 1e-15);
    CHECK(std::abs(x[1] + 0.15) < 1e-15);

    Tape t;
    CHECK_THROWS_AS(interaction(t.constant(Array(1, 3)), t.constant(Array(1, 2)), t.constant(Array(1, 1)),
                                t.constant(Array(1, 3))),
                    DimensionError);
}

TEST_CASE("interaction support lies inside the Q row") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + rng.below(8);
        Array q(1, k);
        for (double& v : q.values()) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
        Array x = interact(testing::random_array(rng, 1, k, 0, 1), testing::random_array(rng, 1, k, 0, 1), rng.uniform(),
                           q);
        for (std::size_t j = 0; j < k; ++j)
            if (q[j] == 0.0) CHECK(x[j] == 0.0);
    }
}

TEST_CASE("zeroed head gives a closed-form probability") {
    PredictionHead head({3, 4, 2});
    ParameterStore store;
    head.add_parameters(store);
    Rng rng(2);
    Array b1 = testing::random_array(rng, 1, 4), b2 = testing::random_array(rng, 1, 2), b3 = testing::random_array(rng, 1, 1);
    Array w2 = testing::random_array(rng, 2, 4), w3 = testing::random_array(rng, 1, 2);
    store.at("head.b1").value = b1;
    store.at("head.b2").value = b2;
    store.at("head.b3").value = b3;
    store.at("head.W2").value = w2;
    store.at("head.W3").value = w3;

    Tape t;
    const double y = head.predict(t, store, t.constant(Array::row({0.3, -0.2, 0.1})), 0.0, nullptr).value()[0];
    std::vector<double> x1(4), x2(2);
    for (std::size_t i = 0; i < 4; ++i) x1[i] = sig(b1[i]);
    for (std::size_t o = 0; o < 2; ++o) {
        double s = b2[o];
        for (std::size_t i = 0; i < 4; ++i) s += w2(o, i) * x1[i];
        x2[o] = sig(s);
    }
    const double expect = sig(b3[0] + w3[0] * x2[0] + w3[1] * x2[1]);
    CHECK(std::abs(y - expect) < 1e-15);

    ParameterStore zero;
    head.add_parameters(zero);
    Tape t2;
    const double half = sig(0.0);
    CHECK(head.predict(t2, zero, t2.constant(Array::row({1, 1, 1})), 0.0, nullptr).value()[0] == half);
}

TEST_CASE("head output stays inside (0,1) and matches finite differences") {
    Rng rng(3);
    PredictionHead head({4, 6, 5});
    ParameterStore store;
    head.add_parameters(store);
    for (int trial = 0; trial < 20; ++trial) {
        testing::randomize(store, rng, 3.0);
        Tape t;
        Array y = head.predict(t, store, t.constant(testing::random_array(rng, 7, 4)), 0.0, nullptr).value();
        for (double v : y.values()) CHECK((v > 0.0 && v < 1.0));
    }
    testing::randomize(store, rng);
    Array x = testing::random_array(rng, 2, 4);
    auto obj = [&](Tape& t) { return ops::sum(head.predict(t, store, t.constant(x), 0.0, nullptr)); };
    CHECK(grad_check(store, obj, 1e-5).max_relative_error < 1e-5);
}

TEST_CASE("dropout acts only in training mode") {
    PredictionHead head({3, 16, 8});
    ParameterStore store;
    head.add_parameters(store);
    Rng init(4);
    testing::randomize(store, init);
    Array x = Array::row({0.2, -0.4, 0.1});
    Tape t;
    const double eval_a = head.predict(t, store, t.constant(x), 0.4, nullptr).value()[0];
    const double eval_b = head.predict(t, store, t.constant(x), 0.0, nullptr).value()[0];
    CHECK(eval_a == eval_b);
    Rng rng(5);
    const double train = head.predict(t, store, t.constant(x), 0.4, &rng).value()[0];
    CHECK(train != eval_a);
}

TEST_CASE("monotone clamp keeps head weights non-negative") {
    PredictionHead head({3, 5, 4});
    ParameterStore store;
    head.add_parameters(store);
    Rng rng(6);
    testing::randomize(store, rng);
    head.clamp_monotone(store);
    for (const char* n : {"head.W1", "head.W2", "head.W3"})
        for (double v : store.at(n).value.values()) CHECK(v >= 0.0);
    // biases are untouched
    bool negative_bias = false;
    for (double v : store.at("head.b1").value.values()) negative_bias = negative_bias || v < 0.0;
    CHECK(negative_bias);
}

TEST_CASE("with a monotone head, raising a covered KS entry never lowers the prediction") {
    Rng rng(7);
    PredictionHead head({5, 8, 6});
    ParameterStore store;
    head.add_parameters(store);
    for (int trial = 0; trial < 200; ++trial) {
        testing::randomize(store, rng, 2.0);
        head.clamp_monotone(store);
        Array ks = testing::random_array(rng, 1, 5, 0, 1);
        Array diff = testing::random_array(rng, 1, 5, 0, 1);
        Array q(1, 5);
        for (double& v : q.values()) v = rng.bernoulli(0.6) ? 1.0 : 0.0;
        const std::size_t j = rng.below(5);
        q[j] = 1.0;
        const double disc = rng.uniform(0.01, 1.0);
        Array raised = ks;
        raised[j] = std::min(1.0, ks[j] + rng.uniform(0.0, 0.5));

        Tape t;
        auto pred = [&](const Array& k) {
            return head.predict(t, store, t.constant(interact(k, diff, disc, q)), 0.0, nullptr).value()[0];
        };
        CHECK(pred(raised) >= pred(ks));
    }
}

TEST_CASE("loss examples") {
    Tape t;
    const std::vector<double> one{1.0};
    CHECK(response_loss(t.constant(Array(1, 1, 0.5)), one).value()[0] == std::log(2.0));
    CHECK(response_loss(t.constant(Array(1, 1, 1.0 - 1e-12)), one).value()[0] < 1.1e-7);

    const std::vector<double> labels{1, 0, 1};
    Array p = Array::from_rows({{0.8}, {0.3}, {0.45}});
    const double expect = -(std::log(0.8) + std::log(0.7) + std::log(0.45)) / 3.0;
    CHECK(std::abs(response_loss(t.constant(p), labels).value()[0] - expect) < 1e-12);

    const std::vector<double> bad{2.0};
    CHECK_THROWS_AS(response_loss(t.constant(Array(1, 1, 0.5)), bad), ContractError);
}

TEST_CASE("loss is non-negative and clamped") {
    Rng rng(8);
    Tape t;
    for (int trial = 0; trial < 200; ++trial) {
        const double p = rng.uniform();
        const std::vector<double> y{rng.bernoulli(0.5) ? 1.0 : 0.0};
        const double l = response_loss(t.constant(Array(1, 1, p)), y).value()[0];
        CHECK(l >= 0.0);
        CHECK(std::isfinite(l));
    }
    const std::vector<double> zero{0.0};
    const double worst = response_loss(t.constant(Array(1, 1, 1.0)), zero).value()[0];
    CHECK(std::abs(worst + std::log(ops::kLossClamp)) < 1e-9);
}
