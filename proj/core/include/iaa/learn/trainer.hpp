#pragma once

// Training for the three model kinds:
//   M1  regression only    min sum L_R(z, z_hat)
//   M2  diagnosis only     min sum L_D(y, y_hat)
//   MT  multi-task         min sum alpha L_D + (1 - alpha) L_R
// with L_R = smooth-L1 and L_D = focal loss, optimised by SGD with momentum.

#include "iaa/learn/metrics.hpp"
#include "iaa/learn/network.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iaa::learn {

enum class ModelKind { M1, M2, MT };
enum class ModelSelection { MinValMae, MaxValBalancedAccuracy };

std::string_view to_string(ModelKind kind) noexcept;
std::string_view to_string(ModelSelection sel) noexcept;
ModelKind parse_model_kind(std::string_view name);
ModelSelection parse_model_selection(std::string_view name);

struct TrainConfig {
    double alpha = 0.9;
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double lr_decay_factor = 0.1;
    int lr_decay_every = 10;
    std::uint64_t seed = 0;
    /// Defaults to MinValMae when the diagnosis loss is inactive, otherwise
    /// MaxValBalancedAccuracy.
    std::optional<ModelSelection> model_selection;
    bool frozen_regression_head = false;
    double focal_gamma = 2.0;
    double smooth_l1_beta = 1.0;

    void validate() const;
    double learning_rate_at(int epoch) const noexcept;
};

struct LossWeights {
    double diagnosis = 0.0;
    double regression = 0.0;

    bool diagnosis_active() const noexcept { return diagnosis > 0.0; }
    bool regression_active() const noexcept { return regression > 0.0; }
};

LossWeights loss_weights(ModelKind kind, double alpha);

/// `base` with the head flags required by `kind`.
NetworkConfig network_for(ModelKind kind, NetworkConfig base);

/// Images plus whichever targets are available, all indexed alike.
struct TrainingData {
    int side = 0;
    std::vector<std::string> ids;
    std::vector<double> pixels;  // n * side * side, row-major per image
    std::vector<int> labels;     // diagnosis class; empty when unavailable
    std::vector<double> iaa;     // regression target; empty when unavailable
    std::vector<std::uint8_t> malignant;

    std::size_t size() const noexcept { return ids.size(); }
    bool has_labels() const noexcept { return !labels.empty(); }
    bool has_iaa() const noexcept { return !iaa.empty(); }

    /// Throws when the per-image arrays disagree in length.
    void validate() const;
    Tensor batch(std::span<const std::size_t> indices) const;
    TrainingData subset(std::span<const std::size_t> indices) const;
};

struct Targets {
    std::vector<int> labels;
    std::vector<double> iaa;
};

Targets targets_for(const TrainingData& data, std::span<const std::size_t> indices);

struct ObjectiveSettings {
    LossWeights weights;
    double focal_gamma = 2.0;
    double smooth_l1_beta = 1.0;
};

struct ObjectiveValue {
    double total = 0.0;
    double diagnosis = 0.0;   // batch mean of L_D (0 when inactive)
    double regression = 0.0;  // batch mean of L_R (0 when inactive)
    std::size_t clamped = 0;
    std::optional<Tensor> grad_z_hat;
    std::optional<Tensor> grad_logits;
};

/// Batch-mean objective and its gradient w.r.t. the head outputs. Terms
/// with zero weight are neither evaluated nor differentiated.
ObjectiveValue batch_objective(const BatchPrediction& pred, const Targets& targets, const ObjectiveSettings& settings);

/// Forward plan that runs only the heads whose loss is active; a frozen
/// regression head runs in eval mode.
ForwardOptions training_forward_options(const LossWeights& weights, bool frozen_regression_head,
                                        std::uint64_t dropout_seed);

struct StepSettings {
    ObjectiveSettings objective;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    bool frozen_regression_head = false;
    std::uint64_t dropout_seed = 0;
};

struct StepResult {
    double loss = 0.0;
    double diagnosis_loss = 0.0;
    double regression_loss = 0.0;
    std::size_t clamped = 0;
};

/// One SGD step: g = grad + weight_decay * theta; v = momentum * v + g;
/// theta -= lr * v. Frozen regression-head parameters are left untouched.
/// Throws LearnError on a non-finite loss.
StepResult backward_and_step(Network& net, const Tensor& batch, const Targets& targets, const StepSettings& settings);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_mae;
    std::optional<double> val_balanced_accuracy;
    double learning_rate = 0.0;
};

struct TrainResult {
    Network best;
    Network last;
    int best_epoch = -1;
    EvalReport best_report;
    std::vector<EpochLog> log;
    std::vector<std::string> warnings;
    ModelSelection selection = ModelSelection::MaxValBalancedAccuracy;
    std::uint64_t steps = 0;  // optimiser steps taken
};

using EpochCallback = std::function<void(int epoch, const Network& net)>;

/// Deterministic for a fixed config.seed: the seed fixes initialisation,
/// shuffling and dropout. When `init` is given, training continues from a
/// copy of it (fine-tuning); its head layout must match `kind`.
TrainResult train(ModelKind kind, const TrainingData& train_data, const TrainingData& valid_data,
                  const TrainConfig& config, const NetworkConfig& network, const Network* init = nullptr,
                  const EpochCallback& on_epoch_end = {});

/// Eval-mode metrics for every head the network has and every target the
/// data carries.
EvalReport evaluate(Network& net, const TrainingData& data, int batch_size = 64);

/// Metrics for externally supplied predictions (same index order as data).
EvalReport evaluate_predictions(const TrainingData& data, std::span<const double> z_hat,
                                const std::vector<std::vector<double>>& probabilities, int n_classes);

}  // namespace iaa::learn
