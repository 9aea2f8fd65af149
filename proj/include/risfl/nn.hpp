#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "risfl/rng.hpp"

namespace risfl {

// Dense multilayer perceptron with tanh hidden layers, a linear output layer
// and hand-written backpropagation. The networks here are small (a few
// hundred units), so there is no reason to pull in a learning framework; a
// flat parameter vector also makes consensus averaging, checkpointing and
// finite-difference checks trivial.
class Mlp {
public:
    Mlp() = default;
    // widths: input, hidden..., output
    explicit Mlp(std::vector<int> widths);

    // Truncated-normal init scaled by 1/sqrt(fan_in).
    void init(Rng& rng);

    const std::vector<int>& widths() const { return widths_; }
    int input_size() const { return widths_.front(); }
    int output_size() const { return widths_.back(); }

    std::size_t parameter_count() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }
    void set_parameters(const std::vector<double>& p);

    std::vector<double> forward(std::span<const double> input) const;

    // Per-layer post-activation values for one sample; produced by
    // forward_cached and consumed by backward.
    struct Trace {
        std::vector<std::vector<double>> activations;  // [0] = input, back() = output
    };

    std::vector<double> forward_cached(std::span<const double> input, Trace& trace) const;

    // Given dLoss/dOutput, accumulates dLoss/dParams into grad (same layout
    // as parameters()) and returns dLoss/dInput.
    std::vector<double> backward(const Trace& trace, std::span<const double> output_grad,
                                 std::vector<double>& grad) const;

    // dLoss/dInput only; skips the parameter-gradient accumulation.
    std::vector<double> backward_input(const Trace& trace,
                                       std::span<const double> output_grad) const;

    // params -= lr * grad
    void gradient_step(std::span<const double> grad, double lr);

private:
    std::vector<int> widths_;
    std::vector<double> params_;  // per layer: W row-major (out x in), then bias
    std::vector<std::size_t> layer_offsets_;
};

// target = tau * online + (1 - tau) * target, element-wise.
void soft_blend(const std::vector<double>& online, std::vector<double>& target, double tau);

}  // namespace risfl
