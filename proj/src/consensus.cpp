#include "risfl/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "risfl/spectral.hpp"

namespace risfl {

DelayModel DelayModel::uniform(double seconds) {
    if (seconds < 0.0) throw std::invalid_argument("DelayModel: delays must be nonnegative");
    DelayModel m;
    m.uniform_ = seconds;
    return m;
}

void DelayModel::set_delay(int u, int v, double seconds) {
    if (seconds < 0.0) throw std::invalid_argument("DelayModel: delays must be nonnegative");
    per_link_[{std::min(u, v), std::max(u, v)}] = seconds;
}

double DelayModel::delay(int u, int v) const {
    const auto it = per_link_.find({std::min(u, v), std::max(u, v)});
    if (it != per_link_.end()) return it->second;
    return uniform_.value_or(0.0);
}

double DelayModel::max_delay() const {
    double d = uniform_.value_or(0.0);
    for (const auto& [edge, tau] : per_link_) d = std::max(d, tau);
    return d;
}

std::optional<double> DelayModel::min_positive_delay() const {
    std::optional<double> d;
    if (uniform_ && *uniform_ > 0.0) d = *uniform_;
    for (const auto& [edge, tau] : per_link_)
        if (tau > 0.0 && (!d || tau < *d)) d = tau;
    return d;
}

namespace {

std::vector<double> stacked_mean(const NodeStates& states) {
    const std::size_t dim = states.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& v : states)
        for (std::size_t c = 0; c < dim; ++c) mean[c] += v[c];
    for (double& m : mean) m /= static_cast<double>(states.size());
    return mean;
}

double deviation_norm(const NodeStates& states, const std::vector<double>& mean) {
    double s = 0.0;
    for (const auto& v : states)
        for (std::size_t c = 0; c < mean.size(); ++c) {
            const double d = v[c] - mean[c];
            s += d * d;
        }
    return std::sqrt(s);
}

}  // namespace

double default_dt(double lambda_max) { return std::min(1e-3, 0.005 / lambda_max); }

ConsensusTrace simulate_ode(const Graph& g, const DelayModel& delays, const NodeStates& init,
                            double dt, double horizon) {
    const int n = g.node_count();
    if (!g.connected()) throw std::invalid_argument("simulate_ode: graph must be connected");
    if (static_cast<int>(init.size()) != n)
        throw std::invalid_argument("simulate_ode: init must hold one vector per node");
    const std::size_t dim = init.front().size();
    for (const auto& v : init)
        if (v.size() != dim) throw std::invalid_argument("simulate_ode: init vectors must share a size");
    if (dt <= 0.0) throw std::invalid_argument("simulate_ode: dt must be positive");

    const double lambda_max = graph_spectrum(g).lambda_max;
    double dt_cap = 0.01 / lambda_max;
    if (const auto min_tau = delays.min_positive_delay()) dt_cap = std::min(dt_cap, *min_tau / 10.0);
    if (dt > dt_cap + 1e-15)
        throw std::invalid_argument("simulate_ode: dt too large for lambda_max/delay (max " +
                                    std::to_string(dt_cap) + ")");
    const long long steps = static_cast<long long>(std::ceil(horizon / dt));
    if (steps < 50) throw std::invalid_argument("simulate_ode: horizon must cover at least 50 steps");

    // Per-link delays in whole steps; the state history ring buffer holds
    // enough snapshots for the largest lag. Pre-history is the initial state.
    const auto edges = g.edges();
    std::vector<long long> lag(edges.size());
    long long max_lag = 0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        lag[e] = static_cast<long long>(std::ceil(delays.delay(edges[e].first, edges[e].second) / dt - 1e-12));
        max_lag = std::max(max_lag, lag[e]);
    }

    std::vector<NodeStates> history(static_cast<std::size_t>(max_lag) + 1, init);

    ConsensusTrace trace;
    trace.dt = dt;
    trace.max_delay = delays.max_delay();
    trace.initial_mean = stacked_mean(init);
    trace.times.reserve(steps + 1);
    trace.states.reserve(steps + 1);
    trace.deviation.reserve(steps + 1);

    NodeStates cur = init;
    trace.times.push_back(0.0);
    trace.states.push_back(cur);
    trace.deviation.push_back(deviation_norm(cur, trace.initial_mean));

    NodeStates next = cur;
    for (long long step = 0; step < steps; ++step) {
        for (auto& v : next) std::fill(v.begin(), v.end(), 0.0);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [i, j] = edges[e];
            // State at t - tau_ij: "lag[e] steps ago", clamped into pre-history.
            const long long back = std::min<long long>(lag[e], step);
            const NodeStates& past = history[(step - back) % history.size()];
            for (std::size_t c = 0; c < dim; ++c) {
                const double flow = past[j][c] - past[i][c];
                next[i][c] += flow;
                next[j][c] -= flow;
            }
        }
        for (int u = 0; u < n; ++u)
            for (std::size_t c = 0; c < dim; ++c) next[u][c] = cur[u][c] + dt * next[u][c];
        cur = next;
        history[(step + 1) % history.size()] = cur;
        trace.times.push_back(static_cast<double>(step + 1) * dt);
        trace.states.push_back(cur);
        trace.deviation.push_back(deviation_norm(cur, trace.initial_mean));
        // Stop early once hopelessly divergent; keeps unstable sweeps cheap.
        if (trace.deviation.back() > 1e9 * std::max(1.0, trace.deviation.front())) break;
    }
    return trace;
}

std::string to_string(Stability s) {
    switch (s) {
        case Stability::kConverged: return "converged";
        case Stability::kDiverged: return "diverged";
        case Stability::kUndecided: return "undecided";
    }
    return "undecided";
}

Stability classify_stability(const ConsensusTrace& trace) {
    if (trace.deviation.empty()) throw std::invalid_argument("classify_stability: empty trace");
    const double initial = trace.initial_deviation();
    const double divergence_bar = 1e3 * initial;
    if (initial > 0.0)
        for (double d : trace.deviation)
            if (d > divergence_bar) return Stability::kDiverged;
    if (trace.final_deviation() < 1e-6 * std::max(1.0, initial)) return Stability::kConverged;
    return Stability::kUndecided;
}

DecayReport decay_bound_check(const ConsensusTrace& trace, double lambda2) {
    if (trace.max_delay > 0.0)
        throw std::invalid_argument("decay_bound_check: bound only applies to zero-delay traces");
    DecayReport report;
    const double initial = trace.initial_deviation();
    if (initial == 0.0) return report;  // 0/0 envelope counts as a pass
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double envelope = initial * std::exp(-lambda2 * trace.times[k]);
        if (envelope <= 0.0) continue;
        report.max_ratio = std::max(report.max_ratio, trace.deviation[k] / envelope);
    }
    report.violated = report.max_ratio > 1.0 + 1e-3;
    return report;
}

NodeStates consensus_round(const NodeStates& params, const Graph& g, double step) {
    const int n = g.node_count();
    if (static_cast<int>(params.size()) != n)
        throw std::invalid_argument("consensus_round: one parameter vector per node required");
    const double max_step = 1.0 / (g.max_degree() + 1.0);
    if (step <= 0.0 || step > max_step + 1e-15)
        throw std::invalid_argument("consensus_round: step must lie in (0, 1/(d_max+1)] = (0, " +
                                    std::to_string(max_step) + "]");
    const std::size_t dim = params.front().size();
    NodeStates out = params;
    for (int u = 0; u < n; ++u) {
        for (int v : g.neighbors(u))
            for (std::size_t c = 0; c < dim; ++c) out[u][c] += step * (params[v][c] - params[u][c]);
    }
    return out;
}

std::string trace_to_csv(const ConsensusTrace& trace) {
    std::ostringstream out;
    out.precision(17);
    out << "time,node_id,component_id,value\n";
    for (std::size_t k = 0; k < trace.times.size(); ++k)
        for (std::size_t u = 0; u < trace.states[k].size(); ++u)
            for (std::size_t c = 0; c < trace.states[k][u].size(); ++c)
                out << trace.times[k] << "," << u << "," << c << "," << trace.states[k][u][c] << "\n";
    return out.str();
}

std::string deviation_to_csv(const ConsensusTrace& trace) {
    std::ostringstream out;
    out.precision(17);
    out << "time,deviation\n";
    for (std::size_t k = 0; k < trace.times.size(); ++k)
        out << trace.times[k] << "," << trace.deviation[k] << "\n";
    return out.str();
}

}  // namespace risfl
