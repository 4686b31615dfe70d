#pragma once

#include "iaa/learn/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace iaa::learn {

inline constexpr std::size_t kMaxGradientCheckParams = 5000;

struct GradientCheckOptions {
    /// Near the cube root of machine epsilon, where truncation and rounding
    /// error in a central difference balance.
    double epsilon = 1e-5;
    /// Coordinates probed, drawn without replacement; 0 probes all of them.
    std::size_t sample = 0;
    std::uint64_t seed = 0;
    /// Train mode runs with batch statistics and a dropout mask fixed by
    /// `seed`, so the objective stays a deterministic function of the weights.
    Mode mode = Mode::Eval;
};

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::string worst_parameter;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric) noexcept;

/// Compares the analytic gradient of batch_objective against central
/// differences. Only heads whose loss weight is positive take part. The
/// network's parameters and running statistics are restored afterwards.
GradientCheckResult gradient_check(Network& net, const Tensor& batch, const Targets& targets,
                                   const ObjectiveSettings& objective, const GradientCheckOptions& options = {});

}  // namespace iaa::learn
