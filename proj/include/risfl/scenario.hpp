#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "risfl/channel.hpp"
#include "risfl/consensus.hpp"
#include "risfl/ddpg.hpp"
#include "risfl/flbench.hpp"
#include "risfl/graph.hpp"
#include "risfl/planner.hpp"

namespace risfl {

// Raised on malformed scenario files; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat "section.key = value" scenario description; the machine-readable form
// of the simulation parameter table. Every field has a default recorded in
// the manifest when left unset; unknown keys are rejected so typos cannot
// silently fall back to defaults.
struct ScenarioConfig {
    std::uint64_t seed = 1;

    std::string graph_preset = "fig3a-candidate";  // star8|ring8|path-N|fig3a-candidate|fig3b-candidate
    std::string graph_edge_list_file;              // overrides the preset when set

    PlannerConfig planner;

    ChannelParams channel;
    std::string geometry_preset = "fig3";
    int ris_elements = 16;

    double traffic_bits = 6.4e6;  // Lambda, the shared model volume
    double r_lower_bps = 8e6;

    DdpgConfig ddpg;
    int ddpg_episodes = 500;
    int ddpg_steps = 40;
    double gamma_penalty = 1.0;
    int eval_draws = 50;
    int eval_rollout = 40;
    int eval_restarts = 3;
    std::string ris_plan_file;  // empty: the built-in revision plan for the preset graph

    std::vector<double> consensus_taus{0.17, 0.18, 0.19, 0.20, 0.21, 0.22};
    double consensus_horizon = 60.0;
    double consensus_dt = 0.0;  // 0 = min(1e-3, 0.005/lambda_max)
    bool consensus_full_trace = false;

    std::string fl_mode = "revised";
    int fl_staleness = 0;
    double fl_sharing_step = 0.0;  // 0 = 1/(d_max + 1)
    int fl_rounds = 8;
    int fl_epochs_per_round = 10;
    int fl_seeds = 5;
    int fl_samples = 2000;
    int fl_dim = 32;
    int fl_classes = 5;
    double fl_noise = 1.0;
    double fl_lr = 0.005;
    int fl_batch = 32;
    int fl_hidden = 16;

    std::set<std::string> explicit_keys;

    static ScenarioConfig parse_file(const std::string& path);
    static ScenarioConfig parse(const std::string& text);

    // Every key in registry order with its current value; feeds the manifest
    // and the config hash.
    std::vector<std::pair<std::string, std::string>> canonical_items() const;
    std::uint64_t config_hash() const;  // FNV-1a 64 over the canonical listing

    Graph load_graph() const;
    Geometry make_geometry() const;
    LinkPlan revision_plan(const Graph& initial) const;
    RisEnv::Scenario make_ris_scenario() const;
};

// The desk-scale platoon layout: eight cars in two rows at mixed altitudes,
// one building slab blocking the (1,5)/(2,6) corridors, a second blocking
// (0,2), and the RIS mounted high with line of sight to every car.
Geometry fig3_geometry(int ris_elements);

// Construct (1,5) and (2,6), deconstruct (0,2): the revision that turns the
// initial topology into the Moebius-ladder one.
LinkPlan fig3_narrative_plan();

Graph graph_from_preset(const std::string& preset);

// Artifact emission. Stage names: spectrum, audit, plan, consensus,
// train-ris, eval-ris, fl. Every output byte is a function of (config, seed).
class ScenarioRunner {
public:
    ScenarioRunner(ScenarioConfig config, std::string out_dir);

    const ScenarioConfig& config() const { return config_; }
    const std::string& out_dir() const { return out_dir_; }

    // Runs one stage; throws on failure. Artifacts land in out_dir.
    void run_stage(const std::string& stage);

    // Rewrites manifest.txt reflecting config, defaults and stages run so far.
    void write_manifest() const;

    static const std::vector<std::string>& known_stages();

private:
    void stage_spectrum();
    void stage_audit();
    void stage_plan();
    void stage_consensus();
    void stage_train_ris();
    void stage_eval_ris();
    void stage_fl();

    void write_file(const std::string& name, const std::string& contents) const;
    std::string read_file(const std::string& name) const;

    ScenarioConfig config_;
    std::string out_dir_;
    std::vector<std::string> stages_run_;
};

// Plot-family CSVs + pass/fail summary distilled from an artifact directory.
// Missing stages are listed as gaps rather than errors. Byte-deterministic
// given the same artifacts.
struct ReportResult {
    std::vector<std::pair<std::string, std::string>> files;  // name -> contents
    std::string summary;
};

ReportResult build_report(const std::string& artifacts_dir);

}  // namespace risfl
