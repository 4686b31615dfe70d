#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iaa::learn {

struct RegressionMetrics {
    double mae = 0.0;
    double mse = 0.0;
    std::optional<double> mae_benign;
    std::optional<double> mse_benign;
    std::optional<double> mae_malignant;
    std::optional<double> mse_malignant;
};

/// `malignant` may be empty, in which case the per-class fields stay empty.
RegressionMetrics regression_metrics(std::span<const double> target, std::span<const double> predicted,
                                     std::span<const std::uint8_t> malignant);

struct BalancedAccuracy {
    double value = 0.0;
    std::vector<std::optional<double>> recall;  // per class; empty when the class is absent
    std::vector<std::string> warnings;
};

/// Mean recall over the classes present in `labels`.
BalancedAccuracy balanced_accuracy(std::span<const int> labels, std::span<const int> predicted, int n_classes);

/// Area under the ROC curve by the rank (Mann-Whitney) method with midranks:
/// P(score_pos > score_neg) + 0.5 P(score_pos == score_neg). Returns nullopt
/// when either class is missing.
std::optional<double> auroc(std::span<const double> scores, std::span<const std::uint8_t> positive);

struct ClassificationMetrics {
    double balanced_accuracy = 0.0;
    std::optional<double> auroc;  // binary, or macro one-vs-rest for > 2 classes
    std::vector<std::optional<double>> recall;
};

ClassificationMetrics classification_metrics(std::span<const int> labels,
                                             const std::vector<std::vector<double>>& probabilities, int n_classes,
                                             std::vector<std::string>* warnings = nullptr);

struct EvalReport {
    std::size_t n = 0;
    std::optional<RegressionMetrics> regression;
    std::optional<ClassificationMetrics> classification;
    std::vector<std::string> warnings;
};

}  // namespace iaa::learn
