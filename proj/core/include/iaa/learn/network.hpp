#pragma once

// Shared convolutional backbone with optional regression (IAA) and
// diagnosis heads. Each head is
//   Linear(head_width) -> BatchNorm1d -> ReLU -> Dropout -> Linear(out)
// with out = 1 for regression and n_classes for diagnosis.

#include "iaa/learn/layers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iaa::learn {

enum class Pooling { Max, Average };
enum class Component { Backbone, RegressionHead, DiagnosisHead };

std::string_view to_string(Component c) noexcept;

struct NetworkConfig {
    int input_side = 32;
    std::vector<int> widths{8, 16, 32};
    int head_width = 256;
    int n_classes = 2;
    bool regression_head = true;
    bool diagnosis_head = true;
    double dropout = 0.5;
    double bn_momentum = 0.1;
    Pooling pooling = Pooling::Max;

    void validate() const;
    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct HeadPlan {
    bool run = true;
    Mode mode = Mode::Eval;
};

struct ForwardOptions {
    Mode backbone_mode = Mode::Eval;
    HeadPlan regression{};
    HeadPlan diagnosis{};
    std::uint64_t dropout_seed = 0;

    static ForwardOptions eval() { return {}; }
    static ForwardOptions train(std::uint64_t dropout_seed) {
        return {Mode::Train, {true, Mode::Train}, {true, Mode::Train}, dropout_seed};
    }
};

/// Outputs for one batch; fields for heads that did not run are empty.
struct BatchPrediction {
    std::vector<double> z_hat;
    Tensor logits;                               // (n, n_classes)
    std::vector<std::vector<double>> probabilities;  // softmax(logits) per sample
};

class Network {
public:
    Network() = default;
    /// Initialises every component from its own stream of `seed`, so the
    /// backbone and diagnosis head start identically whether or not the
    /// regression head exists (and vice versa).
    Network(NetworkConfig config, std::uint64_t seed);

    const NetworkConfig& config() const noexcept { return config_; }
    bool has_regression_head() const noexcept { return config_.regression_head; }
    bool has_diagnosis_head() const noexcept { return config_.diagnosis_head; }

    /// `batch` is (n, 1, side, side). Throws on grid mismatch.
    BatchPrediction forward(const Tensor& batch, const ForwardOptions& options);

    /// Gradients w.r.t. the outputs of the heads that ran in the last
    /// forward; pass nullptr for a head that ran but has no loss term.
    void backward(const Tensor* grad_z_hat, const Tensor* grad_logits);

    void zero_grad();

    std::vector<Param*> parameters(Component component);
    std::vector<Param*> parameters();
    std::vector<const Param*> parameters() const;
    std::size_t parameter_count() const;

    /// Named running statistics of every normalisation layer.
    std::vector<std::pair<std::string, std::vector<double>*>> buffers();
    std::vector<std::pair<std::string, const std::vector<double>*>> buffers() const;

private:
    struct ConvBlock {
        Conv2d conv;
        BatchNorm norm;
        ReLU relu;
        MaxPool2 max_pool;
        AvgPool2 avg_pool;
    };

    struct Head {
        Linear hidden;
        BatchNorm norm;
        ReLU relu;
        Dropout dropout;
        Linear out;

        Tensor forward(const Tensor& features, Mode mode, Rng& rng);
        Tensor backward(const Tensor& grad_out);
        void init(Rng& rng);
        std::vector<Param*> params();
    };

    Head make_head(int in_features, int out_features, const std::string& name) const;

    NetworkConfig config_;
    std::vector<ConvBlock> blocks_;
    GlobalAvgPool gap_;
    std::optional<Head> regression_;
    std::optional<Head> diagnosis_;

    bool ran_regression_ = false;
    bool ran_diagnosis_ = false;
};

}  // namespace iaa::learn
