#include "iaa/learn/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace iaa::learn {

double relative_error(double analytic, double numeric) noexcept {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

GradientCheckResult gradient_check(Network& net, const Tensor& batch, const Targets& targets,
                                   const ObjectiveSettings& objective, const GradientCheckOptions& options) {
    if (net.parameter_count() > kMaxGradientCheckParams) {
        throw LearnError("gradient check is limited to networks of at most " +
                         std::to_string(kMaxGradientCheckParams) + " parameters");
    }
    if (!(options.epsilon > 0.0)) throw LearnError("gradient check epsilon must be positive");

    ForwardOptions fopts = training_forward_options(objective.weights, false, options.seed);
    if (options.mode == Mode::Eval) {
        fopts.backbone_mode = Mode::Eval;
        fopts.regression.mode = Mode::Eval;
        fopts.diagnosis.mode = Mode::Eval;
    }

    std::vector<std::vector<double>> saved_buffers;
    for (auto& [name, buf] : net.buffers()) saved_buffers.push_back(*buf);

    auto loss = [&] { return batch_objective(net.forward(batch, fopts), targets, objective).total; };

    net.zero_grad();
    {
        const BatchPrediction pred = net.forward(batch, fopts);
        const ObjectiveValue obj = batch_objective(pred, targets, objective);
        net.backward(obj.grad_z_hat ? &*obj.grad_z_hat : nullptr, obj.grad_logits ? &*obj.grad_logits : nullptr);
    }

    std::vector<std::pair<Param*, std::size_t>> coords;
    for (Param* p : net.parameters()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) coords.emplace_back(p, i);
    }
    if (options.sample > 0 && options.sample < coords.size()) {
        std::vector<std::pair<Param*, std::size_t>> picked;
        Rng rng = make_named_stream(options.seed, 0x4752414443ULL);
        std::sample(coords.begin(), coords.end(), std::back_inserter(picked), options.sample, rng);
        coords = std::move(picked);
    }

    GradientCheckResult result;
    for (auto [p, i] : coords) {
        const double analytic = p->grad[i];
        const double original = p->value[i];
        p->value[i] = original + options.epsilon;
        const double up = loss();
        p->value[i] = original - options.epsilon;
        const double down = loss();
        p->value[i] = original;
        const double numeric = (up - down) / (2.0 * options.epsilon);
        const double err = relative_error(analytic, numeric);
        ++result.checked;
        if (err > result.max_relative_error || result.worst_parameter.empty()) {
            result.max_relative_error = err;
            result.worst_parameter = p->name + "[" + std::to_string(i) + "]";
            result.worst_analytic = analytic;
            result.worst_numeric = numeric;
        }
    }

    std::size_t k = 0;
    for (auto& [name, buf] : net.buffers()) *buf = saved_buffers[k++];
    return result;
}

}  // namespace iaa::learn
