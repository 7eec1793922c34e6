#ifndef CSCD_TRAINER_HPP
#define CSCD_TRAINER_HPP

#include "cscd/cscd_model.hpp"
#include "cscd/dataset.hpp"
#include "cscd/metrics.hpp"
#include "cscd/parameters.hpp"
#include "cscd/response_model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace cscd {

struct TrainConfig {
    ModelConfig model;
    int batch_size = 32;
    double learning_rate = 0.002;
    double dropout = 0.2;
    int max_epochs = 100;
    int patience = 10;
    /// Validation AUC must exceed the best so far by at least this much to count.
    double min_delta = 1e-5;
    std::uint64_t seed = 1;
    SplitRatio ratio;

    /// Throws ConfigError when a field is outside its allowed range:
    /// batch size in {8,16,32,64}, learning rate in [0, 2e-2],
    /// dropout in [0, 0.5), 1 <= max_epochs <= 100, patience >= 1.
    void validate() const;
};

/// Adaptive moment estimation (beta1 0.9, beta2 0.999, eps 1e-8).
class AdamOptimizer {
public:
    AdamOptimizer(const ParameterStore& store, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    /// Applies one update from the gradients currently in `store`.
    void step(ParameterStore& store);
    long steps() const noexcept { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Array> m_, v_;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    MetricReport valid;
    bool valid_defined = true;
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_score = 0.0;
    bool stopped_early = false;

    /// `epoch,train_loss,valid_auc,valid_acc,valid_rmse`, one row per epoch.
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

/// Identifies the dataset a checkpoint was trained on.
struct DatasetFingerprint {
    int learners = 0;
    int exercises = 0;
    int concepts = 0;
    int prereq_edges = 0;
    int dep_edges = 0;
    std::uint64_t structure_hash = 0; ///< FNV-1a over edges and Q-matrix bits

    static DatasetFingerprint of(const Dataset& dataset);
    bool operator==(const DatasetFingerprint&) const = default;
};

struct Checkpoint {
    std::string model_kind; ///< "cscd" or "irt"
    TrainConfig config;
    DatasetFingerprint fingerprint;
    int epoch = 0;
    double best_valid_auc = 0.0;
    ParameterStore params;
};

struct TrainResult {
    Checkpoint checkpoint;
    TrainingLog log;
};

/// Fresh parameters for `model`, initialized deterministically from `seed`.
ParameterStore init_params(const ResponseModel& model, std::uint64_t seed);

/// Called after each epoch; return false to stop.
using EpochCallback = std::function<bool(const EpochRecord&)>;

/// Mini-batch training on the Train split with early stopping on
/// validation AUC. Returns the best-scoring parameters. When validation AUC
/// is undefined (empty or single-class validation split) the negated
/// training loss is used as the score instead.
TrainResult train(const ResponseModel& model, const Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Metrics of `params` on one split. Throws UndefinedMetricError on an empty split.
MetricReport evaluate(const ResponseModel& model, ParameterStore& params, const ResponseLog& log, Split split);

/// Tags `dataset.log` with per-learner train/valid/test splits derived from config.seed.
Dataset with_splits(Dataset dataset, const TrainConfig& config, std::vector<std::string>* warnings = nullptr);

/// Builds the model described by a checkpoint for the given dataset; throws
/// ConfigError when the dataset fingerprint does not match.
std::unique_ptr<ResponseModel> make_model(const Checkpoint& checkpoint, const Dataset& dataset);
std::unique_ptr<ResponseModel> make_model(const std::string& kind, const Dataset& dataset, const TrainConfig& config);

} // namespace cscd

#endif
