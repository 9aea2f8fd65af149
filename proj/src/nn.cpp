#include "risfl/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace risfl {

namespace {

// Four-lane dot product: fixed summation order (bit-stable run to run) while
// still giving the CPU independent accumulator chains.
inline double dot(const double* a, const double* b, int n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

}  // namespace

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
    std::size_t count = 0;
    layer_offsets_.clear();
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        layer_offsets_.push_back(count);
        count += static_cast<std::size_t>(widths_[l + 1]) * widths_[l] + widths_[l + 1];
    }
    params_.assign(count, 0.0);
}

void Mlp::init(Rng& rng) {
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const int in = widths_[l];
        const int out = widths_[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        double* w = params_.data() + layer_offsets_[l];
        for (int k = 0; k < out * in; ++k) w[k] = scale * rng.truncated_normal();
        double* b = w + static_cast<std::size_t>(out) * in;
        for (int k = 0; k < out; ++k) b[k] = 0.0;
    }
}

void Mlp::set_parameters(const std::vector<double>& p) {
    if (p.size() != params_.size()) throw std::invalid_argument("Mlp: parameter size mismatch");
    params_ = p;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
    Trace trace;
    return forward_cached(input, trace);
}

std::vector<double> Mlp::forward_cached(std::span<const double> input, Trace& trace) const {
    if (static_cast<int>(input.size()) != widths_.front())
        throw std::invalid_argument("Mlp: input size mismatch");
    trace.activations.resize(widths_.size());  // keeps inner capacity across calls
    trace.activations[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const int in = widths_[l];
        const int out = widths_[l + 1];
        const double* w = params_.data() + layer_offsets_[l];
        const double* b = w + static_cast<std::size_t>(out) * in;
        const std::vector<double>& prev = trace.activations[l];
        std::vector<double>& next = trace.activations[l + 1];
        next.assign(out, 0.0);
        const bool last = (l + 2 == widths_.size());
        for (int o = 0; o < out; ++o) {
            const double* row = w + static_cast<std::size_t>(o) * in;
            const double z = b[o] + dot(row, prev.data(), in);
            next[o] = last ? z : std::tanh(z);
        }
    }
    return trace.activations.back();
}

std::vector<double> Mlp::backward(const Trace& trace, std::span<const double> output_grad,
                                  std::vector<double>& grad) const {
    if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (std::size_t li = widths_.size() - 1; li-- > 0;) {
        const int in = widths_[li];
        const int out = widths_[li + 1];
        const double* w = params_.data() + layer_offsets_[li];
        double* gw = grad.data() + layer_offsets_[li];
        double* gb = gw + static_cast<std::size_t>(out) * in;
        const std::vector<double>& prev = trace.activations[li];
        const std::vector<double>& act = trace.activations[li + 1];
        const bool last = (li + 2 == widths_.size());
        // dL/dz; tanh'(z) = 1 - a^2 with a the cached activation.
        for (int o = 0; o < out; ++o)
            if (!last) delta[o] *= 1.0 - act[o] * act[o];
        std::vector<double> prev_grad(in, 0.0);
        const double* __restrict prev_p = prev.data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            double* __restrict grow = gw + static_cast<std::size_t>(o) * in;
            for (int k = 0; k < in; ++k) grow[k] += d * prev_p[k];
            gb[o] += d;
        }
        double* __restrict pg = prev_grad.data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            const double* __restrict row = w + static_cast<std::size_t>(o) * in;
            for (int k = 0; k < in; ++k) pg[k] += d * row[k];
        }
        delta = std::move(prev_grad);
    }
    return delta;
}

std::vector<double> Mlp::backward_input(const Trace& trace,
                                        std::span<const double> output_grad) const {
    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (std::size_t li = widths_.size() - 1; li-- > 0;) {
        const int in = widths_[li];
        const int out = widths_[li + 1];
        const double* w = params_.data() + layer_offsets_[li];
        const std::vector<double>& act = trace.activations[li + 1];
        const bool last = (li + 2 == widths_.size());
        for (int o = 0; o < out; ++o)
            if (!last) delta[o] *= 1.0 - act[o] * act[o];
        std::vector<double> prev_grad(in, 0.0);
        double* __restrict pg = prev_grad.data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            const double* __restrict row = w + static_cast<std::size_t>(o) * in;
            for (int k = 0; k < in; ++k) pg[k] += d * row[k];
        }
        delta = std::move(prev_grad);
    }
    return delta;
}

void Mlp::gradient_step(std::span<const double> grad, double lr) {
    if (grad.size() != params_.size()) throw std::invalid_argument("Mlp: gradient size mismatch");
    for (std::size_t k = 0; k < params_.size(); ++k) params_[k] -= lr * grad[k];
}

void soft_blend(const std::vector<double>& online, std::vector<double>& target, double tau) {
    if (online.size() != target.size())
        throw std::invalid_argument("soft_blend: parameter size mismatch");
    for (std::size_t k = 0; k < online.size(); ++k)
        target[k] = tau * online[k] + (1.0 - tau) * target[k];
}

}  // namespace risfl
