#include "cscd/metrics.hpp"

#include "cscd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

namespace cscd {
namespace {

void check_inputs(std::span<const double> predictions, std::span<const int> labels, const char* metric) {
    if (predictions.size() != labels.size()) {
        throw DimensionError(std::string(metric) + ": " + std::to_string(predictions.size()) + " predictions vs " +
                             std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw UndefinedMetricError(std::string(metric) + ": empty prediction set");
    for (int y : labels) {
        if (y != 0 && y != 1) throw ContractError(std::string(metric) + ": labels must be 0 or 1");
    }
}

} // namespace

double auc(std::span<const double> predictions, std::span<const int> labels) {
    check_inputs(predictions, labels, "auc");
    const std::size_t n = predictions.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return predictions[a] < predictions[b]; });

    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && predictions[order[j]] == predictions[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                positive_rank_sum += avg_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) throw UndefinedMetricError("auc: needs at least one positive and one negative label");
    const double p = static_cast<double>(positives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

double accuracy(std::span<const double> predictions, std::span<const int> labels, double threshold) {
    check_inputs(predictions, labels, "acc");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if ((predictions[i] >= threshold ? 1 : 0) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double rmse(std::span<const double> predictions, std::span<const int> labels) {
    check_inputs(predictions, labels, "rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double diff = predictions[i] - labels[i];
        acc += diff * diff;
    }
    return std::sqrt(acc / static_cast<double>(predictions.size()));
}

MetricReport evaluate_predictions(std::span<const double> predictions, std::span<const int> labels) {
    return {auc(predictions, labels), accuracy(predictions, labels), rmse(predictions, labels)};
}

std::string metrics_csv_header() { return "model,dataset,split,auc,acc,rmse"; }

std::string metrics_csv_row(const std::string& model, const std::string& dataset, const std::string& split,
                            const MetricReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f", report.auc, report.acc, report.rmse);
    return model + "," + dataset + "," + split + "," + buf;
}

} // namespace cscd
