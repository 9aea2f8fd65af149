#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "risfl/graph.hpp"

namespace risfl {

using NodeStates = std::vector<std::vector<double>>;  // per node, per component

// Symmetric per-link transmission delays tau_ij; a uniform delay applies to
// every link at once.
class DelayModel {
public:
    DelayModel() = default;
    static DelayModel zero() { return DelayModel(); }
    static DelayModel uniform(double seconds);

    void set_delay(int u, int v, double seconds);
    double delay(int u, int v) const;  // 0 when unset
    double max_delay() const;
    // Smallest strictly-positive delay; nullopt when all links are instant.
    std::optional<double> min_positive_delay() const;
    bool is_zero() const { return max_delay() <= 0.0; }

private:
    std::optional<double> uniform_;
    std::map<Edge, double> per_link_;
};

struct ConsensusTrace {
    std::vector<double> times;       // strictly increasing, fixed step dt
    std::vector<NodeStates> states;  // one snapshot per time
    std::vector<double> initial_mean;
    std::vector<double> deviation;   // ||v(t) - mean|| over the stacked states
    double dt = 0.0;
    double max_delay = 0.0;

    double initial_deviation() const { return deviation.empty() ? 0.0 : deviation.front(); }
    double final_deviation() const { return deviation.empty() ? 0.0 : deviation.back(); }
};

// Explicit-Euler integration of the delayed aggregation protocol
//   dv_i/dt = sum_{j in N_i} [v_j(t - tau_ij) - v_i(t - tau_ij)]
// with constant pre-history v(t<0) = v(0). dt must satisfy
// dt <= min(0.01 / lambda_max, min_delay / 10); larger steps are rejected so
// Euler instability cannot masquerade as protocol divergence.
ConsensusTrace simulate_ode(const Graph& g, const DelayModel& delays, const NodeStates& init,
                            double dt, double horizon);

// min(1e-3, 0.005 / lambda_max)
double default_dt(double lambda_max);

enum class Stability { kConverged, kDiverged, kUndecided };

std::string to_string(Stability s);

// converged: final deviation < 1e-6 * max(1, initial); diverged: any
// deviation > 1e3 * initial.
Stability classify_stability(const ConsensusTrace& trace);

struct DecayReport {
    double max_ratio = 0.0;  // max_t deviation(t) / (deviation(0) * e^(-lambda2 t))
    bool violated = false;   // ratio above 1 + 1e-3
};

// Checks the zero-delay exponential envelope; rejects delayed traces (the
// bound is only claimed for the delay-free protocol).
DecayReport decay_bound_check(const ConsensusTrace& trace, double lambda2);

// One discrete sharing round: v_i += step * sum_{j in N_i} (v_j - v_i).
// Requires 0 < step <= 1/(d_max + 1); preserves the node-average vector.
NodeStates consensus_round(const NodeStates& params, const Graph& g, double step);

// CSV exports matching the stability-trace plot family.
std::string trace_to_csv(const ConsensusTrace& trace);           // time,node_id,component_id,value
std::string deviation_to_csv(const ConsensusTrace& trace);       // time,deviation

}  // namespace risfl
