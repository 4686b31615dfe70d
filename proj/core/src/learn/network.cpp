#include "iaa/learn/network.hpp"

#include "iaa/learn/losses.hpp"

#include <algorithm>

namespace iaa::learn {

namespace {

enum StreamTag : std::uint64_t {
    kBackboneInit = 1,
    kRegressionInit = 2,
    kDiagnosisInit = 3,
    kRegressionDropout = 12,
    kDiagnosisDropout = 13,
};

}  // namespace

std::string_view to_string(Component c) noexcept {
    switch (c) {
        case Component::Backbone: return "backbone";
        case Component::RegressionHead: return "regression_head";
        case Component::DiagnosisHead: return "diagnosis_head";
    }
    return "?";
}

void NetworkConfig::validate() const {
    if (input_side <= 0) throw LearnError("input_side must be positive");
    if (widths.empty()) throw LearnError("backbone needs at least one block");
    int side = input_side;
    for (int w : widths) {
        if (w <= 0) throw LearnError("block widths must be positive");
        if (side < 2) throw LearnError("too many pooling blocks for input side " + std::to_string(input_side));
        side /= 2;
    }
    if (head_width <= 0) throw LearnError("head_width must be positive");
    if (n_classes < 2) throw LearnError("n_classes must be at least 2");
    if (!regression_head && !diagnosis_head) throw LearnError("network needs at least one head");
    if (dropout < 0.0 || dropout >= 1.0) throw LearnError("dropout must lie in [0, 1)");
    if (bn_momentum <= 0.0 || bn_momentum > 1.0) throw LearnError("bn_momentum must lie in (0, 1]");
}

Network::Head Network::make_head(int in_features, int out_features, const std::string& name) const {
    return Head{Linear(in_features, config_.head_width, name + ".hidden"),
                BatchNorm(config_.head_width, config_.bn_momentum, name + ".norm"), ReLU{},
                Dropout(config_.dropout), Linear(config_.head_width, out_features, name + ".out")};
}

Network::Network(NetworkConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    Rng backbone_rng = make_named_stream(seed, kBackboneInit);
    int in_c = 1;
    for (std::size_t b = 0; b < config_.widths.size(); ++b) {
        const std::string name = "backbone.block" + std::to_string(b);
        ConvBlock block{Conv2d(in_c, config_.widths[b], name + ".conv"),
                        BatchNorm(config_.widths[b], config_.bn_momentum, name + ".norm"), ReLU{}, MaxPool2{},
                        AvgPool2{}};
        block.conv.init(backbone_rng);
        blocks_.push_back(std::move(block));
        in_c = config_.widths[b];
    }
    const int features = config_.widths.back();
    if (config_.regression_head) {
        Rng rng = make_named_stream(seed, kRegressionInit);
        regression_ = make_head(features, 1, "regression_head");
        regression_->init(rng);
    }
    if (config_.diagnosis_head) {
        Rng rng = make_named_stream(seed, kDiagnosisInit);
        diagnosis_ = make_head(features, config_.n_classes, "diagnosis_head");
        diagnosis_->init(rng);
    }
}

void Network::Head::init(Rng& rng) {
    hidden.init(rng);
    out.init(rng);
}

Tensor Network::Head::forward(const Tensor& features, Mode mode, Rng& rng) {
    Tensor x = hidden.forward(features);
    x = norm.forward(x, mode);
    x = relu.forward(x);
    x = dropout.forward(x, mode, rng);
    return out.forward(x);
}

Tensor Network::Head::backward(const Tensor& grad_out) {
    Tensor g = out.backward(grad_out);
    g = dropout.backward(g);
    g = relu.backward(g);
    g = norm.backward(g);
    return hidden.backward(g);
}

std::vector<Param*> Network::Head::params() {
    return {&hidden.weight, &hidden.bias, &norm.gamma, &norm.beta, &out.weight, &out.bias};
}

BatchPrediction Network::forward(const Tensor& batch, const ForwardOptions& options) {
    if (batch.c != 1 || batch.h != config_.input_side || batch.w != config_.input_side) {
        throw LearnError("grid mismatch: network expects (n, 1, " + std::to_string(config_.input_side) + ", " +
                         std::to_string(config_.input_side) + "), got (" + std::to_string(batch.n) + ", " +
                         std::to_string(batch.c) + ", " + std::to_string(batch.h) + ", " + std::to_string(batch.w) +
                         ")");
    }
    if (batch.n == 0) throw LearnError("empty batch");

    Tensor x = batch;
    for (auto& block : blocks_) {
        x = block.conv.forward(x);
        x = block.norm.forward(x, options.backbone_mode);
        x = block.relu.forward(x);
        x = config_.pooling == Pooling::Max ? block.max_pool.forward(x) : block.avg_pool.forward(x);
    }
    const Tensor features = gap_.forward(x);

    BatchPrediction pred;
    ran_regression_ = regression_.has_value() && options.regression.run;
    ran_diagnosis_ = diagnosis_.has_value() && options.diagnosis.run;
    if (ran_regression_) {
        Rng rng = make_named_stream(options.dropout_seed, kRegressionDropout);
        const Tensor z = regression_->forward(features, options.regression.mode, rng);
        pred.z_hat = z.data;
    }
    if (ran_diagnosis_) {
        Rng rng = make_named_stream(options.dropout_seed, kDiagnosisDropout);
        pred.logits = diagnosis_->forward(features, options.diagnosis.mode, rng);
        const auto k = static_cast<std::size_t>(config_.n_classes);
        pred.probabilities.reserve(static_cast<std::size_t>(batch.n));
        for (int i = 0; i < batch.n; ++i) {
            pred.probabilities.push_back(
                softmax(std::span<const double>(pred.logits.data.data() + static_cast<std::size_t>(i) * k, k)));
        }
    }
    return pred;
}

void Network::backward(const Tensor* grad_z_hat, const Tensor* grad_logits) {
    if (grad_z_hat && !ran_regression_) throw LearnError("backward: regression head did not run");
    if (grad_logits && !ran_diagnosis_) throw LearnError("backward: diagnosis head did not run");
    if (!grad_z_hat && !grad_logits) return;

    std::optional<Tensor> grad_features;
    if (grad_z_hat) grad_features = regression_->backward(*grad_z_hat);
    if (grad_logits) {
        Tensor g = diagnosis_->backward(*grad_logits);
        if (grad_features) {
            for (std::size_t i = 0; i < g.data.size(); ++i) grad_features->data[i] += g.data[i];
        } else {
            grad_features = std::move(g);
        }
    }

    Tensor g = gap_.backward(*grad_features);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
        g = config_.pooling == Pooling::Max ? it->max_pool.backward(g) : it->avg_pool.backward(g);
        g = it->relu.backward(g);
        g = it->norm.backward(g);
        g = it->conv.backward(g);
    }
}

void Network::zero_grad() {
    for (Param* p : parameters()) p->zero_grad();
}

std::vector<Param*> Network::parameters(Component component) {
    std::vector<Param*> out;
    switch (component) {
        case Component::Backbone:
            for (auto& block : blocks_) {
                out.push_back(&block.conv.weight);
                out.push_back(&block.norm.gamma);
                out.push_back(&block.norm.beta);
            }
            break;
        case Component::RegressionHead:
            if (regression_) out = regression_->params();
            break;
        case Component::DiagnosisHead:
            if (diagnosis_) out = diagnosis_->params();
            break;
    }
    return out;
}

std::vector<Param*> Network::parameters() {
    std::vector<Param*> out = parameters(Component::Backbone);
    for (Component c : {Component::RegressionHead, Component::DiagnosisHead}) {
        auto more = parameters(c);
        out.insert(out.end(), more.begin(), more.end());
    }
    return out;
}

std::vector<const Param*> Network::parameters() const {
    auto mutable_params = const_cast<Network*>(this)->parameters();
    return {mutable_params.begin(), mutable_params.end()};
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const Param* p : parameters()) n += p->value.size();
    return n;
}

std::vector<std::pair<std::string, std::vector<double>*>> Network::buffers() {
    std::vector<std::pair<std::string, std::vector<double>*>> out;
    auto add = [&](BatchNorm& bn) {
        const std::string base = bn.gamma.name.substr(0, bn.gamma.name.size() - std::string(".gamma").size());
        out.emplace_back(base + ".running_mean", &bn.running_mean);
        out.emplace_back(base + ".running_var", &bn.running_var);
    };
    for (auto& block : blocks_) add(block.norm);
    if (regression_) add(regression_->norm);
    if (diagnosis_) add(diagnosis_->norm);
    return out;
}

std::vector<std::pair<std::string, const std::vector<double>*>> Network::buffers() const {
    auto mutable_buffers = const_cast<Network*>(this)->buffers();
    return {mutable_buffers.begin(), mutable_buffers.end()};
}

}  // namespace iaa::learn
