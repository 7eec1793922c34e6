#ifndef CSCD_METRICS_HPP
#define CSCD_METRICS_HPP

#include <span>
#include <string>

namespace cscd {

/// Area under the ROC curve via the Mann-Whitney rank statistic; tied
/// predictions receive average ranks, so a tied positive/negative pair counts
/// one half. Throws UndefinedMetricError unless both classes are present.
double auc(std::span<const double> predictions, std::span<const int> labels);

/// Fraction of samples where (prediction >= threshold) matches the label.
double accuracy(std::span<const double> predictions, std::span<const int> labels, double threshold = 0.5);

/// sqrt(mean((prediction - label)^2)).
double rmse(std::span<const double> predictions, std::span<const int> labels);

struct MetricReport {
    double auc = 0.0;
    double acc = 0.0;
    double rmse = 0.0;
};

MetricReport evaluate_predictions(std::span<const double> predictions, std::span<const int> labels);

/// `model,dataset,split,auc,acc,rmse` header and row.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& model, const std::string& dataset, const std::string& split,
                            const MetricReport& report);

} // namespace cscd

#endif
