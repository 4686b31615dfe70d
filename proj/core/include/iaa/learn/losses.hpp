#pragma once

#include <span>
#include <vector>

namespace iaa::learn {

/// 0.5 d^2 / beta for |d| < beta, else |d| - 0.5 beta, with d = z - z_hat.
double smooth_l1(double z, double z_hat, double beta = 1.0) noexcept;

/// d smooth_l1 / d z_hat. At |d| == beta the quadratic branch is used.
double smooth_l1_grad(double z, double z_hat, double beta = 1.0) noexcept;

inline constexpr double kFocalClamp = 1e-7;

struct FocalValue {
    double loss = 0.0;
    bool clamped = false;  // true-class probability was below kFocalClamp
};

/// -(1 - p_t)^gamma * ln(p_t) for true class `label` of the probability
/// vector `probs`.
FocalValue focal_loss(int label, std::span<const double> probs, double gamma = 2.0);

struct FocalWithGrad {
    double loss = 0.0;
    bool clamped = false;
    std::vector<double> grad;  // w.r.t. logits
};

/// Focal loss of softmax(logits) together with its gradient w.r.t. logits.
FocalWithGrad focal_loss_from_logits(int label, std::span<const double> logits, double gamma = 2.0);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// alpha * diagnosis_loss + (1 - alpha) * regression_loss.
double multitask_loss(double diagnosis_loss, double regression_loss, double alpha) noexcept;

/// Per-sample objective: multitask_loss(focal(y, y_hat), smooth_l1(z, z_hat)).
double multitask_loss(int label, std::span<const double> probs, double z, double z_hat, double alpha,
                      double gamma = 2.0, double beta = 1.0);

}  // namespace iaa::learn
