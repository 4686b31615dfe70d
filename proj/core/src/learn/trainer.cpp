#include "iaa/learn/trainer.hpp"

#include "iaa/learn/losses.hpp"
#include "iaa/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iaa::learn {

namespace {

constexpr std::uint64_t kShuffleTag = 0x5348554646ULL;
constexpr std::uint64_t kDropoutTag = 0x44524F50ULL;

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::M1: return "m1";
        case ModelKind::M2: return "m2";
        case ModelKind::MT: return "mt";
    }
    return "?";
}

std::string_view to_string(ModelSelection sel) noexcept {
    return sel == ModelSelection::MinValMae ? "min-val-mae" : "max-val-balanced-accuracy";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "m1" || name == "M1") return ModelKind::M1;
    if (name == "m2" || name == "M2") return ModelKind::M2;
    if (name == "mt" || name == "MT") return ModelKind::MT;
    throw LearnError("unknown model kind '" + std::string(name) + "' (expected m1, m2 or mt)");
}

ModelSelection parse_model_selection(std::string_view name) {
    if (name == "min-val-mae") return ModelSelection::MinValMae;
    if (name == "max-val-balanced-accuracy") return ModelSelection::MaxValBalancedAccuracy;
    throw LearnError("unknown model selection rule '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw LearnError("alpha must lie in [0, 1]");
    if (epochs <= 0) throw LearnError("epochs must be positive");
    if (batch_size <= 0) throw LearnError("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw LearnError("learning_rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw LearnError("momentum must lie in [0, 1)");
    if (weight_decay < 0.0) throw LearnError("weight_decay must be non-negative");
    if (!(lr_decay_factor > 0.0)) throw LearnError("lr_decay_factor must be positive");
    if (lr_decay_every <= 0) throw LearnError("lr_decay_every must be positive");
    if (focal_gamma < 0.0) throw LearnError("focal gamma must be non-negative");
    if (!(smooth_l1_beta > 0.0)) throw LearnError("smooth-L1 beta must be positive");
}

double TrainConfig::learning_rate_at(int epoch) const noexcept {
    return learning_rate * std::pow(lr_decay_factor, static_cast<double>(epoch / lr_decay_every));
}

LossWeights loss_weights(ModelKind kind, double alpha) {
    switch (kind) {
        case ModelKind::M1: return {0.0, 1.0};
        case ModelKind::M2: return {1.0, 0.0};
        case ModelKind::MT: return {alpha, 1.0 - alpha};
    }
    return {};
}

NetworkConfig network_for(ModelKind kind, NetworkConfig base) {
    base.regression_head = kind != ModelKind::M2;
    base.diagnosis_head = kind != ModelKind::M1;
    return base;
}

void TrainingData::validate() const {
    const std::size_t n = ids.size();
    if (side <= 0 && n > 0) throw LearnError("training data has no image side");
    if (pixels.size() != n * static_cast<std::size_t>(side) * static_cast<std::size_t>(side)) {
        throw LearnError("training data pixel buffer does not match image count");
    }
    if (!labels.empty() && labels.size() != n) throw LearnError("label count does not match image count");
    if (!iaa.empty() && iaa.size() != n) throw LearnError("IAA target count does not match image count");
    if (!malignant.empty() && malignant.size() != n) throw LearnError("malignancy flags do not match image count");
}

Tensor TrainingData::batch(std::span<const std::size_t> indices) const {
    Tensor t(static_cast<int>(indices.size()), 1, side, side);
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(indices[i] * plane), plane,
                    t.data.begin() + static_cast<std::ptrdiff_t>(i * plane));
    }
    return t;
}

TrainingData TrainingData::subset(std::span<const std::size_t> indices) const {
    TrainingData out;
    out.side = side;
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (std::size_t idx : indices) {
        out.ids.push_back(ids.at(idx));
        out.pixels.insert(out.pixels.end(), pixels.begin() + static_cast<std::ptrdiff_t>(idx * plane),
                          pixels.begin() + static_cast<std::ptrdiff_t>((idx + 1) * plane));
        if (has_labels()) out.labels.push_back(labels[idx]);
        if (has_iaa()) out.iaa.push_back(iaa[idx]);
        if (!malignant.empty()) out.malignant.push_back(malignant[idx]);
    }
    return out;
}

Targets targets_for(const TrainingData& data, std::span<const std::size_t> indices) {
    Targets t;
    for (std::size_t idx : indices) {
        if (data.has_labels()) t.labels.push_back(data.labels[idx]);
        if (data.has_iaa()) t.iaa.push_back(data.iaa[idx]);
    }
    return t;
}

ObjectiveValue batch_objective(const BatchPrediction& pred, const Targets& targets, const ObjectiveSettings& s) {
    ObjectiveValue out;
    if (s.weights.diagnosis_active()) {
        const int n = pred.logits.n;
        const auto k = static_cast<std::size_t>(pred.logits.c);
        if (n == 0) throw LearnError("diagnosis loss requested but the diagnosis head did not run");
        if (targets.labels.size() != static_cast<std::size_t>(n)) throw LearnError("missing diagnosis labels");
        Tensor grad(n, pred.logits.c);
        double sum = 0.0;
        const double scale = s.weights.diagnosis / static_cast<double>(n);
        for (int i = 0; i < n; ++i) {
            const std::span<const double> row(pred.logits.data.data() + static_cast<std::size_t>(i) * k, k);
            const FocalWithGrad f = focal_loss_from_logits(targets.labels[static_cast<std::size_t>(i)], row, s.focal_gamma);
            sum += f.loss;
            if (f.clamped) ++out.clamped;
            for (std::size_t j = 0; j < k; ++j) grad.data[static_cast<std::size_t>(i) * k + j] = scale * f.grad[j];
        }
        out.diagnosis = sum / static_cast<double>(n);
        out.total += s.weights.diagnosis * out.diagnosis;
        out.grad_logits = std::move(grad);
    }
    if (s.weights.regression_active()) {
        const std::size_t n = pred.z_hat.size();
        if (n == 0) throw LearnError("regression loss requested but the regression head did not run");
        if (targets.iaa.size() != n) throw LearnError("missing IAA targets");
        Tensor grad(static_cast<int>(n), 1);
        double sum = 0.0;
        const double scale = s.weights.regression / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            sum += smooth_l1(targets.iaa[i], pred.z_hat[i], s.smooth_l1_beta);
            grad.data[i] = scale * smooth_l1_grad(targets.iaa[i], pred.z_hat[i], s.smooth_l1_beta);
        }
        out.regression = sum / static_cast<double>(n);
        out.total += s.weights.regression * out.regression;
        out.grad_z_hat = std::move(grad);
    }
    return out;
}

ForwardOptions training_forward_options(const LossWeights& weights, bool frozen_regression_head,
                                        std::uint64_t dropout_seed) {
    ForwardOptions o;
    o.backbone_mode = Mode::Train;
    o.regression = {weights.regression_active(), frozen_regression_head ? Mode::Eval : Mode::Train};
    o.diagnosis = {weights.diagnosis_active(), Mode::Train};
    o.dropout_seed = dropout_seed;
    return o;
}

StepResult backward_and_step(Network& net, const Tensor& batch, const Targets& targets, const StepSettings& s) {
    net.zero_grad();
    const ForwardOptions fopts =
        training_forward_options(s.objective.weights, s.frozen_regression_head, s.dropout_seed);
    const BatchPrediction pred = net.forward(batch, fopts);
    ObjectiveValue obj = batch_objective(pred, targets, s.objective);
    if (!std::isfinite(obj.total)) {
        throw LearnError("non-finite loss (diagnosis " + std::to_string(obj.diagnosis) + ", regression " +
                         std::to_string(obj.regression) + "); try a smaller learning rate");
    }
    net.backward(obj.grad_z_hat ? &*obj.grad_z_hat : nullptr, obj.grad_logits ? &*obj.grad_logits : nullptr);

    auto update = [&](Component c) {
        for (Param* p : net.parameters(c)) {
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                const double g = p->grad[i] + s.weight_decay * p->value[i];
                p->velocity[i] = s.momentum * p->velocity[i] + g;
                p->value[i] -= s.learning_rate * p->velocity[i];
            }
        }
    };
    // Heads outside the loss graph get no update at all, weight decay included.
    update(Component::Backbone);
    if (fopts.regression.run && !s.frozen_regression_head) update(Component::RegressionHead);
    if (fopts.diagnosis.run) update(Component::DiagnosisHead);

    return {obj.total, obj.diagnosis, obj.regression, obj.clamped};
}

EvalReport evaluate_predictions(const TrainingData& data, std::span<const double> z_hat,
                                const std::vector<std::vector<double>>& probabilities, int n_classes) {
    if (data.size() == 0) throw LearnError("cannot evaluate an empty fold");
    EvalReport report;
    report.n = data.size();
    if (!z_hat.empty() && data.has_iaa()) {
        report.regression = regression_metrics(data.iaa, z_hat, data.malignant);
    }
    if (!probabilities.empty() && data.has_labels()) {
        report.classification = classification_metrics(data.labels, probabilities, n_classes, &report.warnings);
    }
    return report;
}

EvalReport evaluate(Network& net, const TrainingData& data, int batch_size) {
    data.validate();
    if (data.size() == 0) throw LearnError("cannot evaluate an empty fold");
    std::vector<double> z_hat;
    std::vector<std::vector<double>> probs;
    const auto bs = static_cast<std::size_t>(std::max(1, batch_size));
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size(); start += bs) {
        idx.clear();
        for (std::size_t i = start; i < std::min(data.size(), start + bs); ++i) idx.push_back(i);
        BatchPrediction pred = net.forward(data.batch(idx), ForwardOptions::eval());
        z_hat.insert(z_hat.end(), pred.z_hat.begin(), pred.z_hat.end());
        for (auto& p : pred.probabilities) probs.push_back(std::move(p));
    }
    return evaluate_predictions(data, z_hat, probs, net.config().n_classes);
}

TrainResult train(ModelKind kind, const TrainingData& train_data, const TrainingData& valid_data,
                  const TrainConfig& config, const NetworkConfig& network, const Network* init,
                  const EpochCallback& on_epoch_end) {
    config.validate();
    train_data.validate();
    valid_data.validate();
    if (train_data.size() == 0) throw LearnError("training fold is empty");
    if (valid_data.size() == 0) throw LearnError("validation fold is empty");

    TrainResult result;
    LossWeights weights = loss_weights(kind, config.alpha);
    if (weights.regression_active() && !train_data.has_iaa()) {
        if (kind == ModelKind::M1) throw LearnError("regression model needs IAA targets");
        result.warnings.push_back("no IAA targets: regression loss dropped, training on the diagnosis loss only");
        weights.regression = 0.0;
    }
    if (weights.diagnosis_active() && !train_data.has_labels()) {
        throw LearnError("diagnosis loss needs class labels");
    }

    NetworkConfig net_cfg = network_for(kind, network);
    Network net;
    if (init) {
        const NetworkConfig& ic = init->config();
        if (ic.regression_head != net_cfg.regression_head || ic.diagnosis_head != net_cfg.diagnosis_head) {
            throw LearnError("initial network's heads do not match model kind " + std::string(to_string(kind)));
        }
        net = *init;
        for (Param* p : net.parameters()) std::fill(p->velocity.begin(), p->velocity.end(), 0.0);
        net_cfg = ic;
    } else {
        net = Network(net_cfg, config.seed);
    }
    if (train_data.side != net_cfg.input_side || valid_data.side != net_cfg.input_side) {
        throw LearnError("grid mismatch: data side " + std::to_string(train_data.side) + " vs network input side " +
                         std::to_string(net_cfg.input_side));
    }
    for (int label : train_data.labels) {
        if (label < 0 || label >= net_cfg.n_classes) throw LearnError("label out of range for the diagnosis head");
    }

    result.selection = config.model_selection.value_or(weights.diagnosis_active() ? ModelSelection::MaxValBalancedAccuracy
                                                                                  : ModelSelection::MinValMae);
    if (result.selection == ModelSelection::MinValMae && (!net.has_regression_head() || !valid_data.has_iaa())) {
        throw LearnError("min-val-MAE selection needs a regression head and validation IAA targets");
    }
    if (result.selection == ModelSelection::MaxValBalancedAccuracy &&
        (!net.has_diagnosis_head() || !valid_data.has_labels())) {
        throw LearnError("balanced-accuracy selection needs a diagnosis head and validation labels");
    }

    StepSettings step;
    step.objective = {weights, config.focal_gamma, config.smooth_l1_beta};
    step.momentum = config.momentum;
    step.weight_decay = config.weight_decay;
    step.frozen_regression_head = config.frozen_regression_head;

    const std::uint64_t shuffle_seed = mix_seed(config.seed ^ kShuffleTag);
    const std::uint64_t dropout_base = mix_seed(config.seed ^ kDropoutTag);
    const auto bs = static_cast<std::size_t>(config.batch_size);
    std::uint64_t global_step = 0;
    double best_score = 0.0;

    std::vector<std::size_t> order(train_data.size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        step.learning_rate = config.learning_rate_at(epoch);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng = make_stream(shuffle_seed, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t end = std::min(order.size(), start + bs);
            // Batch statistics are undefined for a single sample.
            if (end - start < 2) continue;
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            step.dropout_seed = dropout_base + global_step++;
            const StepResult r = backward_and_step(net, train_data.batch(idx), targets_for(train_data, idx), step);
            loss_sum += r.loss * static_cast<double>(idx.size());
            seen += idx.size();
        }
        if (seen == 0) throw LearnError("training fold too small for batch normalisation");

        EvalReport report = evaluate(net, valid_data);
        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = loss_sum / static_cast<double>(seen);
        entry.learning_rate = step.learning_rate;
        if (weights.regression_active() && report.regression) entry.val_mae = report.regression->mae;
        if (weights.diagnosis_active() && report.classification) {
            entry.val_balanced_accuracy = report.classification->balanced_accuracy;
        }
        result.log.push_back(entry);

        const double score = result.selection == ModelSelection::MinValMae ? -report.regression->mae
                                                                           : report.classification->balanced_accuracy;
        if (result.best_epoch < 0 || score > best_score) {
            best_score = score;
            result.best_epoch = epoch;
            result.best = net;
            result.best_report = report;
        }
        if (on_epoch_end) on_epoch_end(epoch, net);
    }
    for (const auto& w : result.best_report.warnings) result.warnings.push_back(w);
    result.steps = global_step;
    result.last = std::move(net);
    return result;
}

}  // namespace iaa::learn
