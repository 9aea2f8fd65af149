#include <doctest.h>

#include <cmath>

#include "risfl/nn.hpp"

using namespace risfl;

namespace {

// Central finite differences of a scalar function of the parameters.
template <typename Loss>
std::vector<double> fd_gradient(Mlp& net, Loss loss, double h = 1e-6) {
    std::vector<double> grad(net.parameter_count());
    for (std::size_t k = 0; k < net.parameter_count(); ++k) {
        const double saved = net.parameters()[k];
        net.parameters()[k] = saved + h;
        const double up = loss();
        net.parameters()[k] = saved - h;
        const double down = loss();
        net.parameters()[k] = saved;
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double rel) {
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double scale = std::max({std::abs(a[k]), std::abs(b[k]), 1e-6});
        CHECK(std::abs(a[k] - b[k]) / scale < rel);
    }
}

}  // namespace

TEST_CASE("forward of a hand-set single layer") {
    Mlp net({2, 2});
    net.parameters() = {1.0, 2.0,   // row 0
                        3.0, 4.0,   // row 1
                        0.5, -0.5}; // bias
    const auto y = net.forward(std::vector<double>{1.0, 1.0});
    CHECK(y[0] == doctest::Approx(3.5));
    CHECK(y[1] == doctest::Approx(6.5));
}

TEST_CASE("backward matches finite differences") {
    Rng rng(101);
    Mlp net({5, 7, 4, 3});
    net.init(rng);
    std::vector<double> x(5), target(3);
    for (double& v : x) v = rng.normal();
    for (double& v : target) v = rng.normal();

    auto loss_value = [&]() {
        const auto y = net.forward(x);
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (y[k] - target[k]) * (y[k] - target[k]);
        return 0.5 * s;
    };

    Mlp::Trace trace;
    const auto y = net.forward_cached(x, trace);
    std::vector<double> dy(3);
    for (int k = 0; k < 3; ++k) dy[k] = y[k] - target[k];
    std::vector<double> grad;
    net.backward(trace, dy, grad);

    check_close(grad, fd_gradient(net, loss_value), 1e-6);
}

TEST_CASE("input gradient matches finite differences") {
    Rng rng(55);
    Mlp net({4, 6, 2});
    net.init(rng);
    std::vector<double> x(4);
    for (double& v : x) v = rng.normal();

    Mlp::Trace trace;
    const auto y = net.forward_cached(x, trace);
    std::vector<double> dy{1.0, -2.0};
    std::vector<double> scratch;
    const auto dx = net.backward(trace, dy, scratch);

    for (int k = 0; k < 4; ++k) {
        const double h = 1e-6;
        auto eval = [&](double v) {
            auto xs = x;
            xs[k] = v;
            const auto out = net.forward(xs);
            return out[0] - 2.0 * out[1];
        };
        const double fd = (eval(x[k] + h) - eval(x[k] - h)) / (2.0 * h);
        CHECK(dx[k] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("gradient step moves parameters downhill") {
    Rng rng(9);
    Mlp net({3, 5, 1});
    net.init(rng);
    std::vector<double> x{0.2, -0.4, 1.0};
    auto loss_value = [&]() {
        const double y = net.forward(x)[0];
        return 0.5 * y * y;
    };
    const double before = loss_value();
    Mlp::Trace trace;
    const double y = net.forward_cached(x, trace)[0];
    std::vector<double> grad;
    net.backward(trace, std::vector<double>{y}, grad);
    net.gradient_step(grad, 0.05);
    CHECK(loss_value() < before);
}

TEST_CASE("soft blend") {
    std::vector<double> online{1.0, 1.0};
    std::vector<double> target{0.0, 2.0};
    soft_blend(online, target, 0.01);
    CHECK(target[0] == doctest::Approx(0.01));
    CHECK(target[1] == doctest::Approx(1.99));

    // fixed point: equal vectors stay equal
    std::vector<double> same{3.0};
    soft_blend({3.0}, same, 0.01);
    CHECK(same[0] == doctest::Approx(3.0));

    // repeated blending converges geometrically at rate (1 - tau)
    std::vector<double> t{0.0};
    for (int k = 0; k < 100; ++k) soft_blend({1.0}, t, 0.01);
    CHECK(t[0] == doctest::Approx(1.0 - std::pow(0.99, 100)).epsilon(1e-12));
}

TEST_CASE("init is deterministic per seed and respects truncation") {
    Mlp a({10, 20, 5});
    Mlp b({10, 20, 5});
    Rng ra(77), rb(77);
    a.init(ra);
    b.init(rb);
    CHECK(a.parameters() == b.parameters());
    const double bound = 2.0 / std::sqrt(10.0) + 1e-12;  // widest layer has fan_in 10
    for (double p : a.parameters()) CHECK(std::abs(p) <= bound);
}
