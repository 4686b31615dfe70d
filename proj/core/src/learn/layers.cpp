#include "iaa/learn/layers.hpp"

#include <algorithm>
#include <cmath>

namespace iaa::learn {

namespace {

void he_normal(Param& p, double fan_in, Rng& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (double& v : p.value) v = dist(rng);
}

}  // namespace

Conv2d::Conv2d(int in_c, int out_c, std::string name)
    : weight(std::move(name) + ".weight", static_cast<std::size_t>(out_c) * in_c * 9),
      in_channels(in_c),
      out_channels(out_c) {}

void Conv2d::init(Rng& rng) { he_normal(weight, 9.0 * in_channels, rng); }

Tensor Conv2d::forward(const Tensor& x) {
    if (x.c != in_channels) throw LearnError("conv: expected " + std::to_string(in_channels) + " channels");
    input_ = x;
    Tensor out(x.n, out_channels, x.h, x.w);
    const int h = x.h;
    const int w = x.w;
    for (int i = 0; i < x.n; ++i) {
        for (int oc = 0; oc < out_channels; ++oc) {
            double* o = &out.at(i, oc, 0, 0);
            for (int ic = 0; ic < in_channels; ++ic) {
                const double* in = &x.at(i, ic, 0, 0);
                const double* k = &weight.value[(static_cast<std::size_t>(oc) * in_channels + ic) * 9];
                for (int ky = 0; ky < 3; ++ky) {
                    const int y0 = std::max(0, 1 - ky);
                    const int y1 = std::min(h, h + 1 - ky);
                    for (int kx = 0; kx < 3; ++kx) {
                        const double kv = k[ky * 3 + kx];
                        const int x0 = std::max(0, 1 - kx);
                        const int x1 = std::min(w, w + 1 - kx);
                        for (int y = y0; y < y1; ++y) {
                            double* orow = o + static_cast<std::size_t>(y) * w;
                            const double* irow = in + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
                            for (int xx = x0; xx < x1; ++xx) orow[xx] += kv * irow[xx];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
    const Tensor& x = input_;
    Tensor grad_in(x.n, x.c, x.h, x.w);
    const int h = x.h;
    const int w = x.w;
    for (int i = 0; i < x.n; ++i) {
        for (int oc = 0; oc < out_channels; ++oc) {
            const double* go = &grad_out.at(i, oc, 0, 0);
            for (int ic = 0; ic < in_channels; ++ic) {
                const double* in = &x.at(i, ic, 0, 0);
                double* gi = &grad_in.at(i, ic, 0, 0);
                const std::size_t kbase = (static_cast<std::size_t>(oc) * in_channels + ic) * 9;
                for (int ky = 0; ky < 3; ++ky) {
                    const int y0 = std::max(0, 1 - ky);
                    const int y1 = std::min(h, h + 1 - ky);
                    for (int kx = 0; kx < 3; ++kx) {
                        const double kv = weight.value[kbase + ky * 3 + kx];
                        const int x0 = std::max(0, 1 - kx);
                        const int x1 = std::min(w, w + 1 - kx);
                        double acc = 0.0;
                        for (int y = y0; y < y1; ++y) {
                            const double* grow = go + static_cast<std::size_t>(y) * w;
                            const std::size_t off = static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
                            const double* irow = in + off;
                            double* girow = gi + off;
                            for (int xx = x0; xx < x1; ++xx) {
                                acc += grow[xx] * irow[xx];
                                girow[xx] += kv * grow[xx];
                            }
                        }
                        weight.grad[kbase + ky * 3 + kx] += acc;
                    }
                }
            }
        }
    }
    return grad_in;
}

BatchNorm::BatchNorm(int channels, double momentum_, std::string name)
    : gamma(name + ".gamma", static_cast<std::size_t>(channels)),
      beta(name + ".beta", static_cast<std::size_t>(channels)),
      running_mean(static_cast<std::size_t>(channels), 0.0),
      running_var(static_cast<std::size_t>(channels), 1.0),
      momentum(momentum_) {
    std::fill(gamma.value.begin(), gamma.value.end(), 1.0);
}

Tensor BatchNorm::forward(const Tensor& x, Mode mode) {
    const auto channels = static_cast<int>(gamma.value.size());
    if (x.c != channels) throw LearnError("batchnorm: channel mismatch");
    mode_ = mode;
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    const double count = static_cast<double>(x.n) * static_cast<double>(plane);
    Tensor out(x.n, x.c, x.h, x.w);
    xhat_ = Tensor(x.n, x.c, x.h, x.w);
    inv_std_.assign(static_cast<std::size_t>(channels), 0.0);

    for (int ch = 0; ch < channels; ++ch) {
        double mean = 0.0;
        double var = 0.0;
        if (mode == Mode::Train) {
            for (int i = 0; i < x.n; ++i) {
                const double* p = &x.at(i, ch, 0, 0);
                for (std::size_t k = 0; k < plane; ++k) mean += p[k];
            }
            mean /= count;
            for (int i = 0; i < x.n; ++i) {
                const double* p = &x.at(i, ch, 0, 0);
                for (std::size_t k = 0; k < plane; ++k) var += (p[k] - mean) * (p[k] - mean);
            }
            const double unbiased = count > 1.0 ? var / (count - 1.0) : var / count;
            var /= count;
            running_mean[ch] = (1.0 - momentum) * running_mean[ch] + momentum * mean;
            running_var[ch] = (1.0 - momentum) * running_var[ch] + momentum * unbiased;
        } else {
            mean = running_mean[ch];
            var = running_var[ch];
        }
        const double inv_std = 1.0 / std::sqrt(var + kEps);
        inv_std_[ch] = inv_std;
        const double g = gamma.value[ch];
        const double b = beta.value[ch];
        for (int i = 0; i < x.n; ++i) {
            const double* p = &x.at(i, ch, 0, 0);
            double* xh = &xhat_.at(i, ch, 0, 0);
            double* o = &out.at(i, ch, 0, 0);
            for (std::size_t k = 0; k < plane; ++k) {
                xh[k] = (p[k] - mean) * inv_std;
                o[k] = g * xh[k] + b;
            }
        }
    }
    return out;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
    const auto channels = static_cast<int>(gamma.value.size());
    const std::size_t plane = static_cast<std::size_t>(grad_out.h) * grad_out.w;
    const double count = static_cast<double>(grad_out.n) * static_cast<double>(plane);
    Tensor grad_in(grad_out.n, grad_out.c, grad_out.h, grad_out.w);

    for (int ch = 0; ch < channels; ++ch) {
        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (int i = 0; i < grad_out.n; ++i) {
            const double* dy = &grad_out.at(i, ch, 0, 0);
            const double* xh = &xhat_.at(i, ch, 0, 0);
            for (std::size_t k = 0; k < plane; ++k) {
                sum_dy += dy[k];
                sum_dy_xhat += dy[k] * xh[k];
            }
        }
        gamma.grad[ch] += sum_dy_xhat;
        beta.grad[ch] += sum_dy;

        const double g = gamma.value[ch];
        const double inv_std = inv_std_[ch];
        for (int i = 0; i < grad_out.n; ++i) {
            const double* dy = &grad_out.at(i, ch, 0, 0);
            const double* xh = &xhat_.at(i, ch, 0, 0);
            double* dx = &grad_in.at(i, ch, 0, 0);
            if (mode_ == Mode::Train) {
                for (std::size_t k = 0; k < plane; ++k) {
                    dx[k] = g * inv_std / count * (count * dy[k] - sum_dy - xh[k] * sum_dy_xhat);
                }
            } else {
                for (std::size_t k = 0; k < plane; ++k) dx[k] = g * inv_std * dy[k];
            }
        }
    }
    return grad_in;
}

Tensor ReLU::forward(const Tensor& x) {
    Tensor out = x;
    active_.assign(x.size(), 0);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        if (out.data[i] > 0.0) {
            active_[i] = 1;
        } else {
            out.data[i] = 0.0;
        }
    }
    return out;
}

Tensor ReLU::backward(const Tensor& grad_out) const {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        if (!active_[i]) g.data[i] = 0.0;
    }
    return g;
}

Tensor MaxPool2::forward(const Tensor& x) {
    in_h_ = x.h;
    in_w_ = x.w;
    const int oh = x.h / 2;
    const int ow = x.w / 2;
    if (oh == 0 || ow == 0) throw LearnError("max pool: input smaller than 2x2");
    Tensor out(x.n, x.c, oh, ow);
    argmax_.assign(out.size(), 0);
    std::size_t o = 0;
    for (int i = 0; i < x.n; ++i) {
        for (int ch = 0; ch < x.c; ++ch) {
            const std::size_t base = (static_cast<std::size_t>(i) * x.c + ch) * x.h * x.w;
            for (int y = 0; y < oh; ++y) {
                for (int xx = 0; xx < ow; ++xx, ++o) {
                    std::size_t best = base + static_cast<std::size_t>(2 * y) * x.w + 2 * xx;
                    for (int dy = 0; dy < 2; ++dy) {
                        for (int dx = 0; dx < 2; ++dx) {
                            const std::size_t idx = base + static_cast<std::size_t>(2 * y + dy) * x.w + 2 * xx + dx;
                            if (x.data[idx] > x.data[best]) best = idx;
                        }
                    }
                    argmax_[o] = best;
                    out.data[o] = x.data[best];
                }
            }
        }
    }
    return out;
}

Tensor MaxPool2::backward(const Tensor& grad_out) const {
    Tensor g(grad_out.n, grad_out.c, in_h_, in_w_);
    for (std::size_t o = 0; o < grad_out.data.size(); ++o) g.data[argmax_[o]] += grad_out.data[o];
    return g;
}

Tensor AvgPool2::forward(const Tensor& x) {
    in_h_ = x.h;
    in_w_ = x.w;
    const int oh = x.h / 2;
    const int ow = x.w / 2;
    if (oh == 0 || ow == 0) throw LearnError("avg pool: input smaller than 2x2");
    Tensor out(x.n, x.c, oh, ow);
    for (int i = 0; i < x.n; ++i) {
        for (int ch = 0; ch < x.c; ++ch) {
            for (int y = 0; y < oh; ++y) {
                for (int xx = 0; xx < ow; ++xx) {
                    out.at(i, ch, y, xx) = 0.25 * (x.at(i, ch, 2 * y, 2 * xx) + x.at(i, ch, 2 * y, 2 * xx + 1) +
                                                   x.at(i, ch, 2 * y + 1, 2 * xx) + x.at(i, ch, 2 * y + 1, 2 * xx + 1));
                }
            }
        }
    }
    return out;
}

Tensor AvgPool2::backward(const Tensor& grad_out) const {
    Tensor g(grad_out.n, grad_out.c, in_h_, in_w_);
    for (int i = 0; i < grad_out.n; ++i) {
        for (int ch = 0; ch < grad_out.c; ++ch) {
            for (int y = 0; y < grad_out.h; ++y) {
                for (int xx = 0; xx < grad_out.w; ++xx) {
                    const double v = 0.25 * grad_out.at(i, ch, y, xx);
                    g.at(i, ch, 2 * y, 2 * xx) += v;
                    g.at(i, ch, 2 * y, 2 * xx + 1) += v;
                    g.at(i, ch, 2 * y + 1, 2 * xx) += v;
                    g.at(i, ch, 2 * y + 1, 2 * xx + 1) += v;
                }
            }
        }
    }
    return g;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
    in_h_ = x.h;
    in_w_ = x.w;
    Tensor out(x.n, x.c);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int i = 0; i < x.n; ++i) {
        for (int ch = 0; ch < x.c; ++ch) {
            const double* p = &x.at(i, ch, 0, 0);
            double s = 0.0;
            for (std::size_t k = 0; k < plane; ++k) s += p[k];
            out.at(i, ch, 0, 0) = s / static_cast<double>(plane);
        }
    }
    return out;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out) const {
    Tensor g(grad_out.n, grad_out.c, in_h_, in_w_);
    const std::size_t plane = static_cast<std::size_t>(in_h_) * in_w_;
    for (int i = 0; i < grad_out.n; ++i) {
        for (int ch = 0; ch < grad_out.c; ++ch) {
            const double v = grad_out.at(i, ch, 0, 0) / static_cast<double>(plane);
            double* p = &g.at(i, ch, 0, 0);
            for (std::size_t k = 0; k < plane; ++k) p[k] = v;
        }
    }
    return g;
}

Linear::Linear(int in_f, int out_f, std::string name)
    : weight(name + ".weight", static_cast<std::size_t>(in_f) * out_f),
      bias(name + ".bias", static_cast<std::size_t>(out_f)),
      in_features(in_f),
      out_features(out_f) {}

void Linear::init(Rng& rng) {
    he_normal(weight, static_cast<double>(in_features), rng);
    std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

Tensor Linear::forward(const Tensor& x) {
    if (x.stride() != static_cast<std::size_t>(in_features)) {
        throw LearnError("linear: expected " + std::to_string(in_features) + " features, got " +
                         std::to_string(x.stride()));
    }
    input_ = x;
    Tensor out(x.n, out_features);
    for (int i = 0; i < x.n; ++i) {
        const double* in = x.data.data() + static_cast<std::size_t>(i) * in_features;
        for (int o = 0; o < out_features; ++o) {
            const double* wr = weight.value.data() + static_cast<std::size_t>(o) * in_features;
            double acc = bias.value[o];
            for (int k = 0; k < in_features; ++k) acc += wr[k] * in[k];
            out.data[static_cast<std::size_t>(i) * out_features + o] = acc;
        }
    }
    return out;
}

Tensor Linear::backward(const Tensor& grad_out) {
    const Tensor& x = input_;
    Tensor grad_in(x.n, x.c, x.h, x.w);
    for (int i = 0; i < x.n; ++i) {
        const double* in = x.data.data() + static_cast<std::size_t>(i) * in_features;
        double* gi = grad_in.data.data() + static_cast<std::size_t>(i) * in_features;
        for (int o = 0; o < out_features; ++o) {
            const double g = grad_out.data[static_cast<std::size_t>(i) * out_features + o];
            bias.grad[o] += g;
            const double* wr = weight.value.data() + static_cast<std::size_t>(o) * in_features;
            double* gw = weight.grad.data() + static_cast<std::size_t>(o) * in_features;
            for (int k = 0; k < in_features; ++k) {
                gw[k] += g * in[k];
                gi[k] += g * wr[k];
            }
        }
    }
    return grad_in;
}

Tensor Dropout::forward(const Tensor& x, Mode mode, Rng& rng) {
    if (mode == Mode::Eval || p_ <= 0.0) {
        scale_.assign(x.size(), 1.0);
        return x;
    }
    std::bernoulli_distribution keep(1.0 - p_);
    const double s = 1.0 / (1.0 - p_);
    scale_.resize(x.size());
    Tensor out = x;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        scale_[i] = keep(rng) ? s : 0.0;
        out.data[i] *= scale_[i];
    }
    return out;
}

Tensor Dropout::backward(const Tensor& grad_out) const {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] *= scale_[i];
    return g;
}

}  // namespace iaa::learn
