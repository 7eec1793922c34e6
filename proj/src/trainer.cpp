#include "cscd/trainer.hpp"

#include "hash.hpp"

#include "cscd/errors.hpp"
#include "cscd/irt.hpp"
#include "cscd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

namespace cscd {

void TrainConfig::validate() const {
    if (batch_size != 8 && batch_size != 16 && batch_size != 32 && batch_size != 64) {
        throw ConfigError("batch size must be one of 8, 16, 32, 64 (got " + std::to_string(batch_size) + ")");
    }
    if (!(learning_rate >= 0.0 && learning_rate <= 2e-2)) {
        throw ConfigError("learning rate must lie in [0, 0.02] (got " + std::to_string(learning_rate) + ")");
    }
    if (!(dropout >= 0.0 && dropout < 0.5)) {
        throw ConfigError("dropout must lie in [0, 0.5) (got " + std::to_string(dropout) + ")");
    }
    if (max_epochs < 1 || max_epochs > 100) throw ConfigError("max_epochs must lie in [1, 100]");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (!(min_delta >= 0.0)) throw ConfigError("min_delta must be non-negative");
    if (!(ratio.train > 0 && ratio.valid > 0 && ratio.test > 0)) throw ConfigError("split ratio components must be positive");
    if (model.dim <= 0 || model.layers < 0 || model.hidden1 <= 0 || model.hidden2 <= 0) {
        throw ConfigError("model dimensions must be positive");
    }
    if (!(model.leaky_slope > 0.0 && model.leaky_slope < 1.0)) throw ConfigError("LeakyReLU slope must lie in (0,1)");
}

AdamOptimizer::AdamOptimizer(const ParameterStore& store, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const Parameter& p : store) {
        m_.emplace_back(p.value.rows(), p.value.cols());
        v_.emplace_back(p.value.rows(), p.value.cols());
    }
}

void AdamOptimizer::step(ParameterStore& store) {
    if (store.size() != m_.size()) throw DimensionError("AdamOptimizer: parameter store changed shape");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t i = 0;
    for (Parameter& p : store) {
        Array& m = m_[i];
        Array& v = v_[i];
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const double g = p.grad[k];
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
            p.value[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
        }
        ++i;
    }
}

std::string TrainingLog::to_csv() const {
    std::ostringstream out;
    out << "epoch,train_loss,valid_auc,valid_acc,valid_rmse\n";
    char buf[160];
    for (const EpochRecord& e : epochs) {
        if (e.valid_defined) {
            std::snprintf(buf, sizeof buf, "%d,%.10f,%.10f,%.10f,%.10f\n", e.epoch, e.train_loss, e.valid.auc,
                          e.valid.acc, e.valid.rmse);
        } else {
            std::snprintf(buf, sizeof buf, "%d,%.10f,,,\n", e.epoch, e.train_loss);
        }
        out << buf;
    }
    return out.str();
}

void TrainingLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_csv();
}

DatasetFingerprint DatasetFingerprint::of(const Dataset& dataset) {
    DatasetFingerprint f;
    f.learners = dataset.learner_count;
    f.exercises = dataset.qmatrix.exercise_count();
    f.concepts = dataset.graph.concept_count();
    f.prereq_edges = static_cast<int>(dataset.graph.prerequisites().size());
    f.dep_edges = static_cast<int>(dataset.graph.dependencies().size());
    std::uint64_t h = hash::kFnvOffset;
    auto mix = [&h](std::uint64_t v) { h = hash::fnv1a_u64(v, h); };
    for (const Edge& e : dataset.graph.prerequisites()) mix((static_cast<std::uint64_t>(e.src) << 32) | static_cast<std::uint32_t>(e.dst));
    mix(0xFFFFFFFFFFFFFFFFULL);
    for (const Edge& e : dataset.graph.dependencies()) mix((static_cast<std::uint64_t>(e.src) << 32) | static_cast<std::uint32_t>(e.dst));
    for (int ex = 0; ex < f.exercises; ++ex)
        for (int k : dataset.qmatrix.exercise_concepts(ex)) mix((static_cast<std::uint64_t>(ex) << 32) | static_cast<std::uint32_t>(k));
    f.structure_hash = h;
    return f;
}

ParameterStore init_params(const ResponseModel& model, std::uint64_t seed) {
    ParameterStore store;
    model.add_parameters(store);
    Rng rng(Rng::derive(seed, 0x1417));
    model.initialize(store, rng);
    return store;
}

namespace {

std::vector<int> labels_of(std::span<const Response> rs) {
    std::vector<int> y;
    y.reserve(rs.size());
    for (const Response& r : rs) y.push_back(r.score);
    return y;
}

} // namespace

MetricReport evaluate(const ResponseModel& model, ParameterStore& params, const ResponseLog& log, Split split) {
    const std::vector<Response> rs = log.subset(split);
    if (rs.empty()) throw UndefinedMetricError(std::string("evaluate: the ") + to_string(split) + " split is empty");
    const std::vector<double> p = model.predict(params, rs);
    return evaluate_predictions(p, labels_of(rs));
}

Dataset with_splits(Dataset dataset, const TrainConfig& config, std::vector<std::string>* warnings) {
    dataset.log = split(dataset.log, config.ratio, Rng::derive(config.seed, 0x5917), warnings);
    return dataset;
}

TrainResult train(const ResponseModel& model, const Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    std::vector<Response> train_set = dataset.log.subset(Split::Train);
    const std::vector<Response> valid_set = dataset.log.subset(Split::Valid);
    if (train_set.empty()) throw ConfigError("train: the training split is empty");
    const std::vector<int> valid_labels = labels_of(valid_set);
    const bool valid_auc_defined = std::count(valid_labels.begin(), valid_labels.end(), 1) > 0 &&
                                   std::count(valid_labels.begin(), valid_labels.end(), 0) > 0;

    TrainResult result;
    result.checkpoint.model_kind = model.kind();
    result.checkpoint.config = config;
    result.checkpoint.fingerprint = DatasetFingerprint::of(dataset);
    ParameterStore params = init_params(model, config.seed);
    AdamOptimizer adam(params, config.learning_rate);

    std::vector<Array> best = params.snapshot();
    double best_score = -std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int since_best = 0;
    double best_auc = 0.0;

    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng order_rng(Rng::derive(config.seed, 0x10000 + static_cast<std::uint64_t>(epoch)));
        Rng dropout_rng(Rng::derive(config.seed, 0x20000 + static_cast<std::uint64_t>(epoch)));
        std::vector<std::size_t> order(train_set.size());
        std::iota(order.begin(), order.end(), 0);
        order_rng.shuffle(order);

        double loss_sum = 0.0;
        std::vector<Response> batch;
        std::vector<double> labels;
        for (std::size_t start = 0, b = 0; start < order.size(); start += bs, ++b) {
            batch.clear();
            labels.clear();
            for (std::size_t i = start; i < std::min(start + bs, order.size()); ++i) {
                batch.push_back(train_set[order[i]]);
                labels.push_back(static_cast<double>(train_set[order[i]].score));
            }
            params.zero_grad();
            Tape tape;
            Var probs = model.forward(tape, params, batch, config.dropout, &dropout_rng);
            Var loss = response_loss(probs, labels);
            const double lv = loss.value()[0];
            if (!std::isfinite(lv)) {
                throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(b) + " (first learner " + std::to_string(batch.front().learner) + ")");
            }
            tape.backward(loss);
            adam.step(params);
            model.after_update(params);
            loss_sum += lv * static_cast<double>(batch.size());
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        double score;
        if (valid_auc_defined) {
            rec.valid = evaluate_predictions(model.predict(params, valid_set), valid_labels);
            score = rec.valid.auc;
        } else {
            rec.valid_defined = false;
            score = -rec.train_loss;
        }
        result.log.epochs.push_back(rec);

        if (score >= best_score + config.min_delta || epoch == 1) {
            best_score = score;
            best_epoch = epoch;
            best_auc = valid_auc_defined ? rec.valid.auc : 0.0;
            best = params.snapshot();
            since_best = 0;
        } else if (++since_best >= config.patience) {
            result.log.stopped_early = epoch < config.max_epochs;
            if (on_epoch) on_epoch(rec);
            break;
        }
        if (on_epoch && !on_epoch(rec)) break;
    }

    params.restore(best);
    result.log.best_epoch = best_epoch;
    result.log.best_score = best_score;
    result.checkpoint.epoch = best_epoch;
    result.checkpoint.best_valid_auc = best_auc;
    result.checkpoint.params = std::move(params);
    return result;
}

std::unique_ptr<ResponseModel> make_model(const std::string& kind, const Dataset& dataset, const TrainConfig& config) {
    if (kind == "cscd") return std::make_unique<CscdModel>(dataset.graph, dataset.qmatrix, dataset.learner_count, config.model);
    if (kind == "irt") return std::make_unique<IrtModel>(dataset.learner_count, dataset.qmatrix.exercise_count());
    throw ConfigError("unknown model kind '" + kind + "' (expected cscd or irt)");
}

std::unique_ptr<ResponseModel> make_model(const Checkpoint& checkpoint, const Dataset& dataset) {
    const DatasetFingerprint f = DatasetFingerprint::of(dataset);
    if (!(f == checkpoint.fingerprint)) {
        throw ConfigError("checkpoint does not match the dataset (learners/exercises/concepts/edges or structure differ)");
    }
    auto model = make_model(checkpoint.model_kind, dataset, checkpoint.config);
    ParameterStore expected;
    model->add_parameters(expected);
    for (const Parameter& p : expected) {
        if (!checkpoint.params.contains(p.name) || !checkpoint.params.at(p.name).value.same_shape(p.value)) {
            throw ConfigError("checkpoint parameter '" + p.name + "' is missing or has the wrong shape");
        }
    }
    return model;
}

} // namespace cscd
