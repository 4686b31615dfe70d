#include "iaa/learn/losses.hpp"

#include "iaa/learn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace iaa::learn {

double smooth_l1(double z, double z_hat, double beta) noexcept {
    const double d = z - z_hat;
    const double ad = std::abs(d);
    return ad < beta ? 0.5 * d * d / beta : ad - 0.5 * beta;
}

double smooth_l1_grad(double z, double z_hat, double beta) noexcept {
    const double d = z - z_hat;
    if (std::abs(d) <= beta) return -d / beta;
    return d > 0.0 ? -1.0 : 1.0;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    const double m = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

FocalValue focal_loss(int label, std::span<const double> probs, double gamma) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
        throw LearnError("focal loss: label " + std::to_string(label) + " out of range");
    }
    double pt = probs[static_cast<std::size_t>(label)];
    FocalValue out;
    if (pt < kFocalClamp) {
        pt = kFocalClamp;
        out.clamped = true;
    }
    out.loss = -std::pow(1.0 - pt, gamma) * std::log(pt);
    return out;
}

FocalWithGrad focal_loss_from_logits(int label, std::span<const double> logits, double gamma) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw LearnError("focal loss: label " + std::to_string(label) + " out of range");
    }
    const auto t = static_cast<std::size_t>(label);
    const std::vector<double> p = softmax(logits);

    // log p_t via log-sum-exp keeps the loss finite for confident mistakes.
    const double m = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double z : logits) lse += std::exp(z - m);
    double log_pt = logits[t] - m - std::log(lse);
    double pt = p[t];

    FocalWithGrad out;
    out.grad.assign(logits.size(), 0.0);
    if (pt < kFocalClamp) {
        // Clamped region: constant loss, zero gradient.
        out.clamped = true;
        out.loss = -std::pow(1.0 - kFocalClamp, gamma) * std::log(kFocalClamp);
        return out;
    }
    const double one_minus = 1.0 - pt;
    if (one_minus <= 0.0) return out;
    const double mod = std::pow(one_minus, gamma);
    out.loss = -mod * log_pt;

    // dL/dp_t = gamma (1 - p_t)^(gamma - 1) ln p_t - (1 - p_t)^gamma / p_t
    // dp_t/dz_j = p_t (delta_tj - p_j)
    const double mod_prev = gamma == 0.0 ? 0.0 : gamma * std::pow(one_minus, gamma - 1.0);
    const double dl_dpt = mod_prev * log_pt - mod / pt;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        const double delta = j == t ? 1.0 : 0.0;
        out.grad[j] = dl_dpt * pt * (delta - p[j]);
    }
    return out;
}

double multitask_loss(double diagnosis_loss, double regression_loss, double alpha) noexcept {
    return alpha * diagnosis_loss + (1.0 - alpha) * regression_loss;
}

double multitask_loss(int label, std::span<const double> probs, double z, double z_hat, double alpha, double gamma,
                      double beta) {
    return multitask_loss(focal_loss(label, probs, gamma).loss, smooth_l1(z, z_hat, beta), alpha);
}

}  // namespace iaa::learn
