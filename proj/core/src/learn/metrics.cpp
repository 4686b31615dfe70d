#include "iaa/learn/metrics.hpp"

#include "iaa/learn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iaa::learn {

RegressionMetrics regression_metrics(std::span<const double> target, std::span<const double> predicted,
                                     std::span<const std::uint8_t> malignant) {
    if (target.size() != predicted.size() || target.empty()) {
        throw LearnError("regression metrics need equally sized, non-empty target and prediction");
    }
    if (!malignant.empty() && malignant.size() != target.size()) {
        throw LearnError("malignancy flags do not match the number of targets");
    }
    RegressionMetrics m;
    double abs_sum[3] = {0, 0, 0};
    double sq_sum[3] = {0, 0, 0};
    std::size_t count[3] = {0, 0, 0};
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double e = predicted[i] - target[i];
        abs_sum[0] += std::abs(e);
        sq_sum[0] += e * e;
        ++count[0];
        if (!malignant.empty()) {
            const std::size_t k = malignant[i] ? 2 : 1;
            abs_sum[k] += std::abs(e);
            sq_sum[k] += e * e;
            ++count[k];
        }
    }
    m.mae = abs_sum[0] / static_cast<double>(count[0]);
    m.mse = sq_sum[0] / static_cast<double>(count[0]);
    if (count[1]) {
        m.mae_benign = abs_sum[1] / static_cast<double>(count[1]);
        m.mse_benign = sq_sum[1] / static_cast<double>(count[1]);
    }
    if (count[2]) {
        m.mae_malignant = abs_sum[2] / static_cast<double>(count[2]);
        m.mse_malignant = sq_sum[2] / static_cast<double>(count[2]);
    }
    return m;
}

BalancedAccuracy balanced_accuracy(std::span<const int> labels, std::span<const int> predicted, int n_classes) {
    if (labels.size() != predicted.size() || labels.empty()) {
        throw LearnError("balanced accuracy needs equally sized, non-empty label and prediction lists");
    }
    std::vector<std::size_t> total(static_cast<std::size_t>(n_classes), 0);
    std::vector<std::size_t> hit(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes) throw LearnError("label out of range");
        ++total[static_cast<std::size_t>(labels[i])];
        if (predicted[i] == labels[i]) ++hit[static_cast<std::size_t>(labels[i])];
    }
    BalancedAccuracy out;
    double sum = 0.0;
    std::size_t present = 0;
    for (int k = 0; k < n_classes; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        if (total[kk] == 0) {
            out.recall.emplace_back(std::nullopt);
            out.warnings.push_back("class " + std::to_string(k) +
                                   " absent from fold; balanced accuracy averages the present classes only");
            continue;
        }
        const double r = static_cast<double>(hit[kk]) / static_cast<double>(total[kk]);
        out.recall.emplace_back(r);
        sum += r;
        ++present;
    }
    out.value = sum / static_cast<double>(present);
    return out;
}

std::optional<double> auroc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
    if (scores.size() != positive.size()) throw LearnError("auroc: size mismatch");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (positive[order[k]]) {
                rank_sum_pos += mid;
                ++n_pos;
            }
        }
        i = j + 1;
    }
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

ClassificationMetrics classification_metrics(std::span<const int> labels,
                                             const std::vector<std::vector<double>>& probabilities, int n_classes,
                                             std::vector<std::string>* warnings) {
    if (labels.size() != probabilities.size()) throw LearnError("classification metrics: size mismatch");
    std::vector<int> predicted(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& p = probabilities[i];
        predicted[i] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    BalancedAccuracy ba = balanced_accuracy(labels, predicted, n_classes);
    ClassificationMetrics out;
    out.balanced_accuracy = ba.value;
    out.recall = ba.recall;
    if (warnings) warnings->insert(warnings->end(), ba.warnings.begin(), ba.warnings.end());

    auto one_vs_rest = [&](int k) {
        std::vector<double> s(labels.size());
        std::vector<std::uint8_t> pos(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            s[i] = probabilities[i][static_cast<std::size_t>(k)];
            pos[i] = labels[i] == k ? 1 : 0;
        }
        return auroc(s, pos);
    };
    if (n_classes == 2) {
        out.auroc = one_vs_rest(1);
    } else {
        double sum = 0.0;
        int used = 0;
        for (int k = 0; k < n_classes; ++k) {
            if (auto a = one_vs_rest(k)) {
                sum += *a;
                ++used;
            }
        }
        if (used > 0) out.auroc = sum / used;
    }
    if (!out.auroc && warnings) warnings->push_back("AUROC undefined: fold lacks a positive or negative class");
    return out;
}

}  // namespace iaa::learn
