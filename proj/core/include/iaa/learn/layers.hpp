#pragma once

// Minimal NCHW tensor and the handful of layers the compact networks need.
// Every layer caches what its backward pass needs during forward; backward
// accumulates into parameter gradients and returns the input gradient.

#include "iaa/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace iaa::learn {

class LearnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tensor {
    int n = 0;
    int c = 0;
    int h = 1;
    int w = 1;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_ = 1, int w_ = 1) : n(n_), c(c_), h(h_), w(w_), data(size_for(n_, c_, h_, w_), 0.0) {}

    static std::size_t size_for(int n, int c, int h, int w) {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    std::size_t size() const noexcept { return data.size(); }
    /// Elements per sample.
    std::size_t stride() const noexcept { return static_cast<std::size_t>(c) * h * w; }

    double& at(int i, int ch, int y, int x) { return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x]; }
    const double& at(int i, int ch, int y, int x) const {
        return data[((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x];
    }
};

/// A trainable array with its gradient and SGD momentum buffer.
struct Param {
    std::string name;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<double> velocity;

    Param() = default;
    Param(std::string name_, std::size_t size)
        : name(std::move(name_)), value(size, 0.0), grad(size, 0.0), velocity(size, 0.0) {}

    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

enum class Mode { Train, Eval };

/// 3x3 convolution, stride 1, zero padding 1, no bias.
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_channels, int out_channels, std::string name);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);

    Param weight;  // [out][in][3][3]
    int in_channels = 0;
    int out_channels = 0;

private:
    Tensor input_;
};

/// Per-channel normalisation over (batch, spatial). Batch statistics in
/// training, running statistics in eval.
class BatchNorm {
public:
    static constexpr double kEps = 1e-5;

    BatchNorm() = default;
    BatchNorm(int channels, double momentum, std::string name);

    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_out);

    Param gamma;
    Param beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.1;

private:
    Mode mode_ = Mode::Eval;
    Tensor xhat_;
    std::vector<double> inv_std_;
};

class ReLU {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    std::vector<std::uint8_t> active_;
};

class MaxPool2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    int in_h_ = 0;
    int in_w_ = 0;
    std::vector<std::size_t> argmax_;
};

class AvgPool2 {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    int in_h_ = 0;
    int in_w_ = 0;
};

/// Spatial mean; output is (n, c, 1, 1).
class GlobalAvgPool {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out) const;

private:
    int in_h_ = 0;
    int in_w_ = 0;
};

/// Fully connected layer over the flattened per-sample features.
class Linear {
public:
    Linear() = default;
    Linear(int in_features, int out_features, std::string name);

    void init(Rng& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);

    Param weight;  // [out][in]
    Param bias;
    int in_features = 0;
    int out_features = 0;

private:
    Tensor input_;
};

/// Inverted dropout; identity in eval mode.
class Dropout {
public:
    Dropout() = default;
    explicit Dropout(double p) : p_(p) {}

    Tensor forward(const Tensor& x, Mode mode, Rng& rng);
    Tensor backward(const Tensor& grad_out) const;

    double p() const noexcept { return p_; }

private:
    double p_ = 0.5;
    std::vector<double> scale_;
};

}  // namespace iaa::learn
