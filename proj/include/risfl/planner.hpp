#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "risfl/graph.hpp"
#include "risfl/spectral.hpp"

namespace risfl {

struct PlannerConfig {
    double eta = 1.0;          // weight of lambda2 in the lambda_max - eta*lambda2 objective
    int max_degree_cap = 4;
    int brute_force_cap = 6;   // max n for the exact bounded-edit search
    int edit_budget = 4;       // max edge edits per plan
};

// Construct/deconstruct link sets. Construct pairs must be absent from the
// graph the plan was made for, deconstruct pairs present, and the sets
// disjoint.
struct LinkPlan {
    std::vector<Edge> construct;
    std::vector<Edge> deconstruct;

    bool empty() const { return construct.empty() && deconstruct.empty(); }
    int size() const { return static_cast<int>(construct.size() + deconstruct.size()); }

    // Text form: lines "C u v" / "D u v".
    std::string to_text() const;
    static LinkPlan from_text(const std::string& text);
    static LinkPlan from_text(std::istream& in);
};

struct CriteriaAudit {
    bool degree_ok = false;
    int worst_degree_node = -1;
    bool odd_cycle_ok = false;
    // Most distant node pairs with their BFS hop distance.
    std::vector<std::pair<Edge, int>> diameter_pairs;
    // Every (node, edge-between-two-of-its-neighbors) witness.
    std::vector<std::pair<int, Edge>> singleton_violations;
};

struct RateThresholds {
    double traffic_bits = 0.0;  // shared model size Lambda
    double r_lower = 0.0;       // bits/s below which a link counts as deconstructed
    double r_upper = 0.0;       // bits/s required by constructive links; derived field
};

enum class RateTargetKind { kConstructAtLeast, kDeconstructAtMost };

struct RateTarget {
    RateTargetKind kind;
    double threshold_bits_per_s;
};

// lambda_max(L) - eta * lambda2(L). Rejects disconnected graphs: lambda2 = 0
// makes the objective meaningless for distributed FL.
double p1_score(const Graph& g, const PlannerConfig& cfg);

CriteriaAudit criteria_audit(const Graph& g, const PlannerConfig& cfg);

// Produces a plan whose application keeps the graph connected, never raises
// the P1 score, respects the degree cap, and prefers revisions that leave an
// odd cycle in place. Exact bounded-edit search for n <= brute_force_cap,
// greedy steepest-descent above it. Returns the empty plan when nothing
// improves.
LinkPlan plan_revision(const Graph& g, const PlannerConfig& cfg);

// The greedy search on its own (one steepest single-edge edit per step).
// Exposed so its score can be compared against the exact optimum.
LinkPlan greedy_plan(const Graph& g, const PlannerConfig& cfg);

// Exact search over all edit sequences within the budget.
LinkPlan exhaustive_plan(const Graph& g, const PlannerConfig& cfg);

Graph apply_plan(const Graph& g, const LinkPlan& plan);

// R_upper = 2 * Lambda * lambda_max / pi.
double rate_upper(double traffic_bits, double lambda_max);

// Per-link rate targets: construct pairs need at least R_upper, deconstruct
// pairs at most r_lower.
std::map<Edge, RateTarget> required_rates(const LinkPlan& plan, double lambda_max_revised,
                                          const RateThresholds& thresholds);

}  // namespace risfl
