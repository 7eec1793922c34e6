#include "cscd/checkpoint.hpp"
#include "cscd/errors.hpp"
#include "cscd/irt.hpp"
#include "cscd/synthetic.hpp"
#include "cscd/trainer.hpp"
#include "model_fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cscd;

namespace {

Dataset small_dataset(std::uint64_t seed = 3) {
    SyntheticSpec spec;
    spec.learners = 30;
    spec.exercises = 12;
    spec.concepts = 6;
    spec.seed = seed;
    return generate(spec).dataset;
}

TrainConfig small_train_config(int epochs) {
    TrainConfig c;
    c.model = testing::small_config(4, 1);
    c.max_epochs = epochs;
    c.batch_size = 16;
    c.seed = 5;
    return c;
}

bool same_params(const ParameterStore& a, const ParameterStore& b) {
    if (a.size() != b.size()) return false;
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end(); ++ia, ++ib) {
        if (ia->name != ib->name || !ia->value.same_shape(ib->value)) return false;
        if (max_abs_diff(ia->value, ib->value) != 0.0) return false;
    }
    return true;
}

} // namespace

TEST_CASE("xavier initialization statistics") {
    ParameterStore store;
    store.add("W", Array(1000, 1000));
    store.add("b", Array(1, 1000, 3.0), ParamRole::Bias);
    Rng rng(1);
    xavier_initialize(store, rng);
    const Array& w = store.at("W").value;
    const double bound = std::sqrt(6.0 / 2000.0);
    double mean = 0.0;
    std::size_t outside = 0;
    for (double v : w.values()) {
        if (std::abs(v) > bound) ++outside;
        mean += v;
    }
    CHECK(outside == 0);
    mean /= static_cast<double>(w.size());
    double var = 0.0;
    for (double v : w.values()) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size());
    CHECK(std::abs(var - 2.0 / 2000.0) < 0.1 * 2.0 / 2000.0);
    for (double v : store.at("b").value.values()) CHECK(v == 0.0);
}

TEST_CASE("init_params is deterministic per seed") {
    Dataset ds = small_dataset();
    CscdModel model(ds.graph, ds.qmatrix, ds.learner_count, testing::small_config());
    CHECK(same_params(init_params(model, 4), init_params(model, 4)));
    CHECK_FALSE(same_params(init_params(model, 4), init_params(model, 5)));
    for (const Parameter& p : init_params(model, 4))
        if (p.role == ParamRole::Bias)
            for (double v : p.value.values()) CHECK(v == 0.0);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    Rng rng(2);
    ParameterStore store;
    store.add("a", testing::random_array(rng, 3, 4));
    store.add("b", testing::random_array(rng, 1, 4), ParamRole::Bias);
    store.zero_grad();
    std::vector<Array> before = store.snapshot();
    AdamOptimizer adam(store, 0.01);
    for (int i = 0; i < 5; ++i) adam.step(store);
    std::vector<Array> after = store.snapshot();
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(max_abs_diff(before[i], after[i]) == 0.0);
}

TEST_CASE("learning rate zero keeps the initial parameters") {
    TrainConfig c = small_train_config(1);
    c.learning_rate = 0.0;
    Dataset ds = with_splits(small_dataset(), c);
    CscdModel model(ds.graph, ds.qmatrix, ds.learner_count, c.model);
    TrainResult r = train(model, ds, c);
    CHECK(same_params(r.checkpoint.params, init_params(model, c.seed)));
}

TEST_CASE("training is deterministic") {
    TrainConfig c = small_train_config(3);
    Dataset ds = with_splits(small_dataset(), c);
    CscdModel model(ds.graph, ds.qmatrix, ds.learner_count, c.model);
    TrainResult a = train(model, ds, c);
    TrainResult b = train(model, ds, c);
    CHECK(a.log.to_csv() == b.log.to_csv());
    CHECK(same_params(a.checkpoint.params, b.checkpoint.params));
    MetricReport ma = evaluate(model, a.checkpoint.params, ds.log, Split::Test);
    MetricReport mb = evaluate(model, b.checkpoint.params, ds.log, Split::Test);
    CHECK(ma.auc == mb.auc);
    CHECK(ma.rmse == mb.rmse);
}

TEST_CASE("label noise triggers early stopping and patience is exact") {
    Rng rng(3);
    Dataset ds;
    ds.graph = ConceptGraph(2);
    ds.qmatrix = QMatrix(10, 2);
    for (int e = 0; e < 10; ++e) ds.qmatrix.set(e, e % 2);
    ds.learner_count = 40;
    for (int l = 0; l < 40; ++l)
        for (int e = 0; e < 10; ++e) ds.log.entries.push_back({l, e, rng.bernoulli(0.5) ? 1 : 0});

    TrainConfig c;
    c.seed = 2;
    c.learning_rate = 0.02;
    ds = with_splits(ds, c);
    IrtModel irt(ds.learner_count, ds.qmatrix.exercise_count());
    TrainResult r = train(irt, ds, c);
    const int ran = static_cast<int>(r.log.epochs.size());
    CHECK(ran < c.max_epochs);
    CHECK(r.log.stopped_early);
    CHECK(ran == r.log.best_epoch + c.patience);
}

TEST_CASE("max_epochs is honored") {
    TrainConfig c = small_train_config(2);
    c.patience = 50;
    Dataset ds = with_splits(small_dataset(), c);
    IrtModel irt(ds.learner_count, ds.qmatrix.exercise_count());
    TrainResult r = train(irt, ds, c);
    CHECK(r.log.epochs.size() == 2);
    CHECK_FALSE(r.log.stopped_early);
}

TEST_CASE("config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    TrainConfig bad = c;
    bad.batch_size = 12;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.learning_rate = 0.03;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.dropout = 0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.max_epochs = 101;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.patience = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("checkpoint round trip reproduces metrics") {
    TrainConfig c = small_train_config(2);
    Dataset ds = with_splits(small_dataset(), c);
    CscdModel model(ds.graph, ds.qmatrix, ds.learner_count, c.model);
    TrainResult r = train(model, ds, c);

    testing::TempDir dir;
    save_checkpoint(r.checkpoint, dir / "ck.json");
    Checkpoint back = load_checkpoint(dir / "ck.json");
    CHECK(back.model_kind == "cscd");
    CHECK(back.epoch == r.checkpoint.epoch);
    CHECK(back.best_valid_auc == r.checkpoint.best_valid_auc);
    CHECK(config_hash(back.config) == config_hash(r.checkpoint.config));
    CHECK(same_params(back.params, r.checkpoint.params));

    auto rebuilt = make_model(back, ds);
    for (Split s : {Split::Train, Split::Valid, Split::Test}) {
        MetricReport a = evaluate(model, r.checkpoint.params, ds.log, s);
        MetricReport b = evaluate(*rebuilt, back.params, ds.log, s);
        CHECK(std::abs(a.auc - b.auc) < 1e-12);
        CHECK(std::abs(a.acc - b.acc) < 1e-12);
        CHECK(std::abs(a.rmse - b.rmse) < 1e-12);
    }
}

TEST_CASE("checkpoint errors") {
    testing::TempDir dir;
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), IoError);
    testing::write_text(dir / "bad.json", "{\"format\": 3");
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), ConfigError);

    TrainConfig c = small_train_config(1);
    Dataset ds = with_splits(small_dataset(), c);
    IrtModel irt(ds.learner_count, ds.qmatrix.exercise_count());
    TrainResult r = train(irt, ds, c);
    Dataset other = small_dataset(99);
    CHECK_THROWS_AS(make_model(r.checkpoint, other), ConfigError);
}

TEST_CASE("evaluate rejects an empty split") {
    Dataset ds = small_dataset();
    IrtModel irt(ds.learner_count, ds.qmatrix.exercise_count());
    ParameterStore p = init_params(irt, 1);
    CHECK_THROWS_AS(evaluate(irt, p, ds.log, Split::Test), UndefinedMetricError);
}

TEST_CASE("training log csv layout") {
    TrainingLog log;
    log.epochs.push_back({1, 0.5, {0.6, 0.55, 0.48}, true});
    log.epochs.push_back({2, 0.4, {}, false});
    const std::string csv = log.to_csv();
    CHECK(csv.rfind("epoch,train_loss,valid_auc,valid_acc,valid_rmse\n", 0) == 0);
    CHECK(csv.find("\n1,0.5000000000,0.6000000000,0.5500000000,0.4800000000\n") != std::string::npos);
    CHECK(csv.find("\n2,0.4000000000,,,\n") != std::string::npos);
}

TEST_CASE("irt saturates on an all-correct single pair") {
    Dataset ds;
    ds.graph = ConceptGraph(2);
    ds.qmatrix = QMatrix(1, 2);
    ds.qmatrix.set(0, 0);
    ds.learner_count = 1;
    ds.log.entries.push_back({0, 0, 1});
    TrainConfig c;
    c.learning_rate = 0.02;
    c.batch_size = 8;
    IrtModel irt(1, 1);
    TrainResult r = train(irt, ds, c);
    const std::vector<Response> one{{0, 0, 1}};
    CHECK(irt.predict(r.checkpoint.params, one)[0] > 0.95);
    CHECK(r.log.epochs.size() == 100);
}

TEST_CASE("irt probability follows the two-parameter logistic form") {
    IrtModel irt(2, 2);
    ParameterStore p = init_params(irt, 3);
    p.at("irt.theta").value = Array::from_rows({{0.4}, {-1.0}});
    p.at("irt.difficulty").value = Array::from_rows({{0.1}, {0.7}});
    p.at("irt.discrimination").value = Array::from_rows({{1.5}, {0.3}});
    const std::vector<Response> rs{{0, 0, 1}, {1, 1, 0}};
    auto y = irt.predict(p, rs);
    CHECK(std::abs(y[0] - 1.0 / (1.0 + std::exp(-1.5 * (0.4 - 0.1)))) < 1e-15);
    CHECK(std::abs(y[1] - 1.0 / (1.0 + std::exp(-0.3 * (-1.0 - 0.7)))) < 1e-15);
}
