#include <doctest.h>

#include <cmath>

#include "acceptance_util.hpp"
#include "risfl/consensus.hpp"
#include "risfl/rng.hpp"
#include "risfl/spectral.hpp"

using namespace risfl;

namespace {

NodeStates boundary_init(const Graph& g, Rng& rng) {
    // lambda_max eigenvector plus seeded noise: excites the critical mode so
    // a divergence verdict does not hinge on round-off leakage.
    const auto eig = laplacian_eigen(g);
    NodeStates init;
    for (int u = 0; u < g.node_count(); ++u)
        init.push_back({eig.vectors(u, g.node_count() - 1) + 0.1 * rng.normal()});
    return init;
}

}  // namespace

TEST_CASE("criterion 3: stability boundary bracketing with dt robustness") {
    Criterion c(3, "0.9 tau* converges, 1.1 tau* diverges on star8/C8/K4; stable under dt/2");
    struct Case {
        const char* name;
        Graph g;
        double horizon;
    };
    const Case cases[] = {
        {"star8", Graph::star(8), 45.0},
        {"C8", Graph::cycle(8), 80.0},
        {"K4", Graph::complete(4), 70.0},
    };
    Rng rng(42);
    for (const auto& [name, g, horizon] : cases) {
        const double lambda_max = graph_spectrum(g).lambda_max;
        const double tau_star = tolerable_delay(lambda_max);
        const NodeStates init = boundary_init(g, rng);
        const double dt0 = std::min(0.01 / lambda_max, 0.9 * tau_star / 10.0);
        for (const double dt : {dt0, dt0 / 2.0}) {
            const auto below =
                simulate_ode(g, DelayModel::uniform(0.9 * tau_star), init, dt, horizon);
            const auto above =
                simulate_ode(g, DelayModel::uniform(1.1 * tau_star), init, dt, horizon);
            c.expect(classify_stability(below) == Stability::kConverged,
                     std::string(name) + " at 0.9 tau* not converged (dt=" + std::to_string(dt) +
                         ")");
            c.expect(classify_stability(above) == Stability::kDiverged,
                     std::string(name) + " at 1.1 tau* not diverged (dt=" + std::to_string(dt) +
                         ")");
        }
    }
    CHECK(c.finish());
}

TEST_CASE("criterion 4: exponential decay envelope") {
    Criterion c(4, "zero-delay deviation stays within ||eps(0)|| e^(-lambda2 t) + 0.1%");
    Rng rng(7);
    struct Case {
        const char* name;
        Graph g;
    };
    const Case cases[] = {
        {"P3", Graph::path(3)},
        {"C8", Graph::cycle(8)},
        {"K8", Graph::complete(8)},
    };
    for (const auto& [name, g] : cases) {
        const auto spec = graph_spectrum(g);
        NodeStates init;
        for (int u = 0; u < g.node_count(); ++u) init.push_back({rng.normal()});
        const double dt = std::min(1e-3, 0.01 / spec.lambda_max);
        const auto trace = simulate_ode(g, DelayModel::zero(), init, dt, 8.0 / spec.lambda2);
        const auto report = decay_bound_check(trace, spec.lambda2);
        c.expect(!report.violated, std::string(name) + " exceeded the envelope: max ratio " +
                                       std::to_string(report.max_ratio));
        c.expect(report.max_ratio <= 1.001,
                 std::string(name) + " ratio above 1.001: " + std::to_string(report.max_ratio));
    }
    CHECK(c.finish());
}

TEST_CASE("criterion 13: mean preservation and convergence to the average") {
    Criterion c(13, "consensus preserves the mean (1e-9) and converges to it (1e-5)");
    Rng rng(99);

    // discrete rounds on random vectors
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(7));
        Graph g(n);
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (rng.uniform() < 0.5) g.add_edge(u, v);
        const int dim = 1 + static_cast<int>(rng.uniform_index(4));
        NodeStates params;
        for (int u = 0; u < n; ++u) {
            params.push_back({});
            for (int d = 0; d < dim; ++d) params.back().push_back(rng.normal() * 10.0);
        }
        std::vector<double> mean0(dim, 0.0);
        double scale = 1.0;
        for (const auto& v : params)
            for (int d = 0; d < dim; ++d) {
                mean0[d] += v[d] / n;
                scale = std::max(scale, std::abs(v[d]));
            }
        const auto out = consensus_round(params, g, 1.0 / (g.max_degree() + 1.0));
        for (int d = 0; d < dim; ++d) {
            double mean = 0.0;
            for (const auto& v : out) mean += v[d] / n;
            if (std::abs(mean - mean0[d]) > 1e-9 * scale)
                c.expect(false, "consensus_round shifted the mean");
        }
    }

    // zero-delay ODE runs: mean constant over the trace, converged value = mean
    for (const Graph& g : {Graph::path(3), Graph::cycle(8), Graph::complete(4)}) {
        const auto spec = graph_spectrum(g);
        NodeStates init;
        for (int u = 0; u < g.node_count(); ++u) init.push_back({rng.normal() * 3.0});
        const double dt = std::min(1e-3, 0.01 / spec.lambda_max);
        const auto trace =
            simulate_ode(g, DelayModel::zero(), init, dt, 25.0 / spec.lambda2);
        c.expect(classify_stability(trace) == Stability::kConverged,
                 "zero-delay run failed to converge");
        double scale = 1.0;
        for (const auto& v : init) scale = std::max(scale, std::abs(v[0]));
        for (std::size_t k = 0; k < trace.times.size(); k += 500) {
            double mean = 0.0;
            for (const auto& v : trace.states[k]) mean += v[0] / g.node_count();
            if (std::abs(mean - trace.initial_mean[0]) > 1e-9 * scale)
                c.expect(false, "ODE run shifted the mean");
        }
        for (const auto& v : trace.states.back())
            if (std::abs(v[0] - trace.initial_mean[0]) > 1e-5)
                c.expect(false, "converged value differs from the initial average");
    }
    CHECK(c.finish());
}
