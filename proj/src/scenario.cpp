#include "risfl/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "risfl/spectral.hpp"

namespace fs = std::filesystem;

namespace risfl {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("not a boolean: '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream ls(s);
    std::string cell;
    while (std::getline(ls, cell, ',')) out.push_back(parse_double(cell));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::string format_double_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ",";
        out += format_double(v[k]);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Field {
    std::string key;
    std::function<std::string(const ScenarioConfig&)> get;
    std::function<void(ScenarioConfig&, const std::string&)> set;
};

const std::vector<Field>& registry() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> f;
        auto add = [&f](std::string key, auto getter, auto setter) {
            f.push_back({std::move(key), getter, setter});
        };
        add("seed", [](const ScenarioConfig& c) { return std::to_string(c.seed); },
            [](ScenarioConfig& c, const std::string& v) { c.seed = parse_u64(v); });
        add("graph.preset", [](const ScenarioConfig& c) { return c.graph_preset; },
            [](ScenarioConfig& c, const std::string& v) { c.graph_preset = v; });
        add("graph.edge_list_file", [](const ScenarioConfig& c) { return c.graph_edge_list_file; },
            [](ScenarioConfig& c, const std::string& v) { c.graph_edge_list_file = v; });
        add("planner.eta", [](const ScenarioConfig& c) { return format_double(c.planner.eta); },
            [](ScenarioConfig& c, const std::string& v) { c.planner.eta = parse_double(v); });
        add("planner.max_degree_cap",
            [](const ScenarioConfig& c) { return std::to_string(c.planner.max_degree_cap); },
            [](ScenarioConfig& c, const std::string& v) { c.planner.max_degree_cap = parse_int(v); });
        add("planner.brute_force_cap",
            [](const ScenarioConfig& c) { return std::to_string(c.planner.brute_force_cap); },
            [](ScenarioConfig& c, const std::string& v) { c.planner.brute_force_cap = parse_int(v); });
        add("planner.edit_budget",
            [](const ScenarioConfig& c) { return std::to_string(c.planner.edit_budget); },
            [](ScenarioConfig& c, const std::string& v) { c.planner.edit_budget = parse_int(v); });
        add("channel.bandwidth_hz",
            [](const ScenarioConfig& c) { return format_double(c.channel.bandwidth_hz); },
            [](ScenarioConfig& c, const std::string& v) { c.channel.bandwidth_hz = parse_double(v); });
        add("channel.tx_power_dbm",
            [](const ScenarioConfig& c) { return format_double(c.channel.tx_power_dbm); },
            [](ScenarioConfig& c, const std::string& v) { c.channel.tx_power_dbm = parse_double(v); });
        add("channel.noise_power_dbm",
            [](const ScenarioConfig& c) { return format_double(c.channel.noise_power_dbm); },
            [](ScenarioConfig& c, const std::string& v) {
                c.channel.noise_power_dbm = parse_double(v);
            });
        add("channel.rice_factor",
            [](const ScenarioConfig& c) { return format_double(c.channel.rice_factor); },
            [](ScenarioConfig& c, const std::string& v) { c.channel.rice_factor = parse_double(v); });
        add("channel.los_exponent",
            [](const ScenarioConfig& c) { return format_double(c.channel.los_exponent); },
            [](ScenarioConfig& c, const std::string& v) { c.channel.los_exponent = parse_double(v); });
        add("channel.nlos_exponent",
            [](const ScenarioConfig& c) { return format_double(c.channel.nlos_exponent); },
            [](ScenarioConfig& c, const std::string& v) {
                c.channel.nlos_exponent = parse_double(v);
            });
        add("channel.ref_loss_db",
            [](const ScenarioConfig& c) { return format_double(c.channel.ref_loss_db); },
            [](ScenarioConfig& c, const std::string& v) { c.channel.ref_loss_db = parse_double(v); });
        add("geometry.preset", [](const ScenarioConfig& c) { return c.geometry_preset; },
            [](ScenarioConfig& c, const std::string& v) { c.geometry_preset = v; });
        add("geometry.ris_elements",
            [](const ScenarioConfig& c) { return std::to_string(c.ris_elements); },
            [](ScenarioConfig& c, const std::string& v) { c.ris_elements = parse_int(v); });
        add("thresholds.traffic_bits",
            [](const ScenarioConfig& c) { return format_double(c.traffic_bits); },
            [](ScenarioConfig& c, const std::string& v) { c.traffic_bits = parse_double(v); });
        add("thresholds.r_lower_bps",
            [](const ScenarioConfig& c) { return format_double(c.r_lower_bps); },
            [](ScenarioConfig& c, const std::string& v) { c.r_lower_bps = parse_double(v); });
        add("ddpg.actor_lr", [](const ScenarioConfig& c) { return format_double(c.ddpg.actor_lr); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.actor_lr = parse_double(v); });
        add("ddpg.critic_lr", [](const ScenarioConfig& c) { return format_double(c.ddpg.critic_lr); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.critic_lr = parse_double(v); });
        add("ddpg.discount", [](const ScenarioConfig& c) { return format_double(c.ddpg.discount); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.discount = parse_double(v); });
        add("ddpg.soft_tau", [](const ScenarioConfig& c) { return format_double(c.ddpg.soft_tau); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.soft_tau = parse_double(v); });
        add("ddpg.replay_capacity",
            [](const ScenarioConfig& c) { return std::to_string(c.ddpg.replay_capacity); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.replay_capacity = parse_int(v); });
        add("ddpg.batch_size", [](const ScenarioConfig& c) { return std::to_string(c.ddpg.batch_size); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.batch_size = parse_int(v); });
        add("ddpg.warmup", [](const ScenarioConfig& c) { return std::to_string(c.ddpg.warmup); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.warmup = parse_int(v); });
        add("ddpg.noise_sigma",
            [](const ScenarioConfig& c) { return format_double(c.ddpg.noise_sigma); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.noise_sigma = parse_double(v); });
        add("ddpg.noise_decay",
            [](const ScenarioConfig& c) { return format_double(c.ddpg.noise_decay); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.noise_decay = parse_double(v); });
        add("ddpg.hidden1", [](const ScenarioConfig& c) { return std::to_string(c.ddpg.hidden1); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.hidden1 = parse_int(v); });
        add("ddpg.hidden2", [](const ScenarioConfig& c) { return std::to_string(c.ddpg.hidden2); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg.hidden2 = parse_int(v); });
        add("ddpg.episodes", [](const ScenarioConfig& c) { return std::to_string(c.ddpg_episodes); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg_episodes = parse_int(v); });
        add("ddpg.steps", [](const ScenarioConfig& c) { return std::to_string(c.ddpg_steps); },
            [](ScenarioConfig& c, const std::string& v) { c.ddpg_steps = parse_int(v); });
        add("ddpg.gamma_penalty",
            [](const ScenarioConfig& c) { return format_double(c.gamma_penalty); },
            [](ScenarioConfig& c, const std::string& v) { c.gamma_penalty = parse_double(v); });
        add("ddpg.eval_draws", [](const ScenarioConfig& c) { return std::to_string(c.eval_draws); },
            [](ScenarioConfig& c, const std::string& v) { c.eval_draws = parse_int(v); });
        add("ddpg.eval_rollout", [](const ScenarioConfig& c) { return std::to_string(c.eval_rollout); },
            [](ScenarioConfig& c, const std::string& v) { c.eval_rollout = parse_int(v); });
        add("ddpg.eval_restarts",
            [](const ScenarioConfig& c) { return std::to_string(c.eval_restarts); },
            [](ScenarioConfig& c, const std::string& v) { c.eval_restarts = parse_int(v); });
        add("ddpg.plan_file", [](const ScenarioConfig& c) { return c.ris_plan_file; },
            [](ScenarioConfig& c, const std::string& v) { c.ris_plan_file = v; });
        add("consensus.taus",
            [](const ScenarioConfig& c) { return format_double_list(c.consensus_taus); },
            [](ScenarioConfig& c, const std::string& v) { c.consensus_taus = parse_double_list(v); });
        add("consensus.horizon",
            [](const ScenarioConfig& c) { return format_double(c.consensus_horizon); },
            [](ScenarioConfig& c, const std::string& v) { c.consensus_horizon = parse_double(v); });
        add("consensus.dt", [](const ScenarioConfig& c) { return format_double(c.consensus_dt); },
            [](ScenarioConfig& c, const std::string& v) { c.consensus_dt = parse_double(v); });
        add("consensus.full_trace",
            [](const ScenarioConfig& c) { return format_bool(c.consensus_full_trace); },
            [](ScenarioConfig& c, const std::string& v) { c.consensus_full_trace = parse_bool(v); });
        add("fl.mode", [](const ScenarioConfig& c) { return c.fl_mode; },
            [](ScenarioConfig& c, const std::string& v) { c.fl_mode = v; });
        add("fl.staleness", [](const ScenarioConfig& c) { return std::to_string(c.fl_staleness); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_staleness = parse_int(v); });
        add("fl.sharing_step",
            [](const ScenarioConfig& c) { return format_double(c.fl_sharing_step); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_sharing_step = parse_double(v); });
        add("fl.rounds", [](const ScenarioConfig& c) { return std::to_string(c.fl_rounds); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_rounds = parse_int(v); });
        add("fl.epochs_per_round",
            [](const ScenarioConfig& c) { return std::to_string(c.fl_epochs_per_round); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_epochs_per_round = parse_int(v); });
        add("fl.seeds", [](const ScenarioConfig& c) { return std::to_string(c.fl_seeds); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_seeds = parse_int(v); });
        add("fl.samples", [](const ScenarioConfig& c) { return std::to_string(c.fl_samples); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_samples = parse_int(v); });
        add("fl.dim", [](const ScenarioConfig& c) { return std::to_string(c.fl_dim); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_dim = parse_int(v); });
        add("fl.classes", [](const ScenarioConfig& c) { return std::to_string(c.fl_classes); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_classes = parse_int(v); });
        add("fl.noise", [](const ScenarioConfig& c) { return format_double(c.fl_noise); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_noise = parse_double(v); });
        add("fl.lr", [](const ScenarioConfig& c) { return format_double(c.fl_lr); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_lr = parse_double(v); });
        add("fl.batch", [](const ScenarioConfig& c) { return std::to_string(c.fl_batch); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_batch = parse_int(v); });
        add("fl.hidden", [](const ScenarioConfig& c) { return std::to_string(c.fl_hidden); },
            [](ScenarioConfig& c, const std::string& v) { c.fl_hidden = parse_int(v); });
        return f;
    }();
    return fields;
}

const Field* find_field(const std::string& key) {
    for (const auto& f : registry())
        if (f.key == key) return &f;
    return nullptr;
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                              stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const Field* field = find_field(key);
        if (!field) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        try {
            field->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "': " + e.what());
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "': bad value '" +
                              value + "'");
        }
        cfg.explicit_keys.insert(key);
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::canonical_items() const {
    std::vector<std::pair<std::string, std::string>> items;
    for (const auto& f : registry()) items.emplace_back(f.key, f.get(*this));
    return items;
}

std::uint64_t ScenarioConfig::config_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= '\n';
        h *= 0x100000001b3ULL;
    };
    for (const auto& [key, value] : canonical_items()) {
        mix(key);
        mix(value);
    }
    return h;
}

Graph graph_from_preset(const std::string& preset) {
    if (preset == "star8") return Graph::star(8);
    if (preset == "ring8") return Graph::cycle(8);
    if (preset == "fig3a-candidate") return Graph::fig3a_initial();
    if (preset == "fig3b-candidate") return Graph::fig3b_revised();
    if (preset.rfind("path-", 0) == 0) {
        const int n = parse_int(preset.substr(5));
        if (n < 2) throw ConfigError("graph preset: path needs at least 2 nodes");
        return Graph::path(n);
    }
    throw ConfigError("unknown graph preset '" + preset + "'");
}

Graph ScenarioConfig::load_graph() const {
    if (!graph_edge_list_file.empty()) {
        std::ifstream in(graph_edge_list_file);
        if (!in) throw ConfigError("cannot open edge list '" + graph_edge_list_file + "'");
        return Graph::from_edge_list(in);
    }
    return graph_from_preset(graph_preset);
}

Geometry fig3_geometry(int ris_elements) {
    Geometry geom;
    geom.car_positions = {
        {0, 0, 60}, {25, -15, 20}, {50, 0, 60}, {75, 0, 60},
        {75, 40, 60}, {50, 40, 20}, {25, 40, 20}, {0, 40, 60},
    };
    // Central building slab: blocks the (1,5) and (2,6) corridors.
    geom.obstructions.push_back(Box{{30, 15, 0}, {45, 25, 50}});
    // Western slab: blocks the redundant (0,2) chord.
    geom.obstructions.push_back(Box{{20, -5, 0}, {30, 5, 70}});
    geom.ris_position = {37.5, -12, 100};
    geom.ris_elements = ris_elements;
    return geom;
}

LinkPlan fig3_narrative_plan() {
    LinkPlan plan;
    plan.construct = {{1, 5}, {2, 6}};
    plan.deconstruct = {{0, 2}};
    return plan;
}

Geometry ScenarioConfig::make_geometry() const {
    if (geometry_preset == "fig3") return fig3_geometry(ris_elements);
    throw ConfigError("unknown geometry preset '" + geometry_preset + "'");
}

LinkPlan ScenarioConfig::revision_plan(const Graph& initial) const {
    if (!ris_plan_file.empty()) {
        std::ifstream in(ris_plan_file);
        if (!in) throw ConfigError("cannot open plan file '" + ris_plan_file + "'");
        return LinkPlan::from_text(std::string(std::istreambuf_iterator<char>(in), {}));
    }
    if (graph_edge_list_file.empty() &&
        (graph_preset == "fig3a-candidate" || graph_preset == "fig3b-candidate"))
        return fig3_narrative_plan();
    return plan_revision(initial, planner);
}

RisEnv::Scenario ScenarioConfig::make_ris_scenario() const {
    const Graph initial = graph_preset == "fig3b-candidate" ? Graph::fig3a_initial() : load_graph();
    const LinkPlan plan = revision_plan(initial);
    const Graph revised = apply_plan(initial, plan);
    RisEnv::Scenario scenario;
    scenario.geometry = make_geometry();
    scenario.params = channel;
    scenario.plan = plan;
    scenario.traffic_bits = traffic_bits;
    scenario.r_lower_bps = r_lower_bps;
    scenario.lambda_max = graph_spectrum(revised).lambda_max;
    scenario.gamma_penalty = gamma_penalty;
    scenario.episode_steps = ddpg_steps;
    return scenario;
}

// ---------------------------------------------------------------------------

ScenarioRunner::ScenarioRunner(ScenarioConfig config, std::string out_dir)
    : config_(std::move(config)), out_dir_(std::move(out_dir)) {
    fs::create_directories(out_dir_);
}

const std::vector<std::string>& ScenarioRunner::known_stages() {
    static const std::vector<std::string> stages{"spectrum", "audit",    "plan", "consensus",
                                                 "train-ris", "eval-ris", "fl"};
    return stages;
}

void ScenarioRunner::write_file(const std::string& name, const std::string& contents) const {
    std::ofstream out(fs::path(out_dir_) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write artifact '" + name + "'");
    out << contents;
}

std::string ScenarioRunner::read_file(const std::string& name) const {
    std::ifstream in(fs::path(out_dir_) / name, std::ios::binary);
    if (!in) throw std::runtime_error("missing artifact '" + name + "'");
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void ScenarioRunner::run_stage(const std::string& stage) {
    if (stage == "spectrum")
        stage_spectrum();
    else if (stage == "audit")
        stage_audit();
    else if (stage == "plan")
        stage_plan();
    else if (stage == "consensus")
        stage_consensus();
    else if (stage == "train-ris")
        stage_train_ris();
    else if (stage == "eval-ris")
        stage_eval_ris();
    else if (stage == "fl")
        stage_fl();
    else
        throw std::invalid_argument("unknown stage '" + stage + "'");
    stages_run_.push_back(stage);
    write_manifest();
}

void ScenarioRunner::write_manifest() const {
    std::ostringstream out;
    out << "risfl-manifest v1\n";
    out << "version " << kVersion << "\n";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_.config_hash()));
    out << "config_hash " << hash << "\n";
    out << "seed " << config_.seed << "\n";
    for (const auto& s : stages_run_) out << "stage " << s << "\n";
    for (const auto& [key, value] : config_.canonical_items()) {
        const bool explicit_key = config_.explicit_keys.count(key) > 0;
        out << (explicit_key ? "set " : "default ") << key << " = " << value << "\n";
    }
    write_file("manifest.txt", out.str());
}

void ScenarioRunner::stage_spectrum() {
    const Graph g = config_.load_graph();
    const auto spec = graph_spectrum(g);
    std::ostringstream out;
    out.precision(17);
    out << "index,eigenvalue\n";
    for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k)
        out << k << "," << spec.eigenvalues[k] << "\n";
    write_file("spectrum.csv", out.str());

    std::ostringstream summary;
    summary.precision(17);
    summary << "lambda2," << spec.lambda2 << "\n";
    summary << "lambda_max," << spec.lambda_max << "\n";
    summary << "d_max," << g.max_degree() << "\n";
    if (spec.lambda_max > 0.0)
        summary << "tolerable_delay," << tolerable_delay(spec.lambda_max) << "\n";
    write_file("spectrum_summary.csv", summary.str());
}

void ScenarioRunner::stage_audit() {
    const Graph g = config_.load_graph();
    const auto audit = criteria_audit(g, config_.planner);
    const auto report = structure_report(g);
    std::ostringstream out;
    out.precision(17);
    out << "degree_ok " << audit.degree_ok << "\n";
    out << "worst_degree_node " << audit.worst_degree_node << " degree "
        << g.degree(audit.worst_degree_node) << "\n";
    out << "odd_cycle_ok " << audit.odd_cycle_ok << "\n";
    out << "is_bipartite " << report.is_bipartite << "\n";
    for (const auto& [pair, dist] : audit.diameter_pairs)
        out << "diameter_pair " << pair.first << " " << pair.second << " dist " << dist << "\n";
    for (const auto& [node, edge] : audit.singleton_violations)
        out << "singleton_violation node " << node << " edge " << edge.first << " " << edge.second
            << "\n";
    if (report.conductance) out << "conductance " << *report.conductance << "\n";
    write_file("audit.txt", out.str());
}

void ScenarioRunner::stage_plan() {
    const Graph g = config_.load_graph();
    const LinkPlan plan = plan_revision(g, config_.planner);
    write_file("plan.txt", plan.to_text());

    const Graph revised = apply_plan(g, plan);
    const auto spec = graph_spectrum(revised);
    RateThresholds thresholds;
    thresholds.traffic_bits = config_.traffic_bits;
    thresholds.r_lower = config_.r_lower_bps;
    const auto targets = required_rates(plan, spec.lambda_max, thresholds);
    std::ostringstream out;
    out.precision(17);
    out << "link,kind,threshold_bps\n";
    for (const auto& [edge, target] : targets)
        out << edge.first << "-" << edge.second << ","
            << (target.kind == RateTargetKind::kConstructAtLeast ? "construct" : "deconstruct")
            << "," << target.threshold_bits_per_s << "\n";
    write_file("plan_rates.csv", out.str());

    std::ostringstream summary;
    summary.precision(17);
    summary << "p1_before," << p1_score(g, config_.planner) << "\n";
    summary << "p1_after," << p1_score(revised, config_.planner) << "\n";
    summary << "lambda2_after," << spec.lambda2 << "\n";
    summary << "lambda_max_after," << spec.lambda_max << "\n";
    summary << "tolerable_delay_after," << tolerable_delay(spec.lambda_max) << "\n";
    write_file("plan_summary.csv", summary.str());
}

void ScenarioRunner::stage_consensus() {
    const Graph g = config_.load_graph();
    const auto eig = laplacian_eigen(g);
    const int n = g.node_count();
    const double lambda_max = eig.values.back();

    // Initial condition: the lambda_max eigenvector plus a little seeded
    // noise, so both the stable and the critical mode are excited.
    Rng rng = Rng(config_.seed).stream(0xc0);
    NodeStates init(n, std::vector<double>(1));
    for (int u = 0; u < n; ++u)
        init[u][0] = eig.vectors(u, n - 1) + 0.1 * rng.normal();

    std::ostringstream sweep;
    sweep.precision(17);
    sweep << "tau,dt,classification,initial_deviation,final_deviation,max_deviation\n";
    for (std::size_t k = 0; k < config_.consensus_taus.size(); ++k) {
        const double tau = config_.consensus_taus[k];
        double dt = config_.consensus_dt > 0.0 ? config_.consensus_dt : default_dt(lambda_max);
        if (tau > 0.0) dt = std::min(dt, tau / 10.0);
        const auto trace = simulate_ode(g, tau > 0.0 ? DelayModel::uniform(tau) : DelayModel::zero(),
                                        init, dt, config_.consensus_horizon);
        const double max_dev = *std::max_element(trace.deviation.begin(), trace.deviation.end());
        sweep << tau << "," << dt << "," << to_string(classify_stability(trace)) << ","
              << trace.initial_deviation() << "," << trace.final_deviation() << "," << max_dev
              << "\n";
        write_file("deviation_" + std::to_string(k) + ".csv", deviation_to_csv(trace));
        if (config_.consensus_full_trace)
            write_file("trace_" + std::to_string(k) + ".csv", trace_to_csv(trace));
    }
    write_file("consensus_sweep.csv", sweep.str());
}

void ScenarioRunner::stage_train_ris() {
    RisEnv env(config_.make_ris_scenario(), config_.seed);
    DdpgAgent agent(env.state_dim(), env.action_dim(), config_.ddpg,
                    Rng(config_.seed).stream(0xa9e27).seed());
    const TrainCurve curve = train(env, agent, config_.ddpg_episodes, config_.ddpg_steps);
    write_file("curve.csv", curve.to_csv());
    write_file("agent.ckpt", agent.save_checkpoint());
}

void ScenarioRunner::stage_eval_ris() {
    RisEnv env(config_.make_ris_scenario(), config_.seed);
    DdpgAgent agent(env.state_dim(), env.action_dim(), config_.ddpg,
                    Rng(config_.seed).stream(0xa9e27).seed());
    agent.load_checkpoint(read_file("agent.ckpt"));
    const EvalReport report =
        evaluate(env, agent, config_.eval_draws, config_.eval_rollout, config_.eval_restarts);
    write_file("eval.csv", report.to_csv());

    // Paired comparison against the direct control baseline on the same draws.
    std::ostringstream residuals;
    residuals.precision(17);
    residuals << "draw,link,ddpg_residual,direct_residual\n";
    double ddpg_sum = 0.0, direct_sum = 0.0;
    int wins = 0, count = 0;
    for (const auto& d : report.draws) {
        env.reset_eval(d.draw);
        const auto baseline = direct_control(env.channels(), env.scenario().plan);
        for (const auto& [link, ddpg_res] : d.deconstruct_residuals) {
            const double direct_res = baseline.residuals.at(link);
            residuals << d.draw << "," << link.first << "-" << link.second << "," << ddpg_res << ","
                      << direct_res << "\n";
            ddpg_sum += ddpg_res;
            direct_sum += direct_res;
            if (ddpg_res < direct_res) ++wins;
            ++count;
        }
    }
    write_file("eval_residuals.csv", residuals.str());

    std::ostringstream summary;
    summary.precision(17);
    summary << "success_fraction," << report.success_fraction << "\n";
    if (count > 0) {
        summary << "mean_ddpg_residual," << ddpg_sum / count << "\n";
        summary << "mean_direct_residual," << direct_sum / count << "\n";
        summary << "ddpg_win_fraction," << static_cast<double>(wins) / count << "\n";
    }
    write_file("eval_summary.csv", summary.str());
}

void ScenarioRunner::stage_fl() {
    FlExperimentConfig fl;
    if (config_.fl_mode == "none")
        fl.mode = SharingMode::kNone;
    else if (config_.fl_mode == "star")
        fl.mode = SharingMode::kStar;
    else if (config_.fl_mode == "revised")
        fl.mode = SharingMode::kRevised;
    else if (config_.fl_mode == "initial")
        fl.mode = SharingMode::kInitial;
    else if (config_.fl_mode == "ring")
        fl.mode = SharingMode::kRing;
    else
        throw ConfigError("unknown fl.mode '" + config_.fl_mode + "'");
    fl.staleness = config_.fl_staleness;
    fl.sharing_step = config_.fl_sharing_step;
    fl.rounds = config_.fl_rounds;
    fl.epochs_per_round = config_.fl_epochs_per_round;
    fl.hidden = config_.fl_hidden;
    fl.train.lr = config_.fl_lr;
    fl.train.batch_size = config_.fl_batch;
    fl.n_samples = config_.fl_samples;
    fl.feature_dim = config_.fl_dim;
    fl.classes = config_.fl_classes;
    fl.noise = config_.fl_noise;

    std::ostringstream summary;
    summary.precision(17);
    summary << "mode,staleness,seed,final_mean_accuracy\n";
    for (int k = 0; k < config_.fl_seeds; ++k) {
        fl.seed = Rng(config_.seed).stream(7000 + k).seed();
        const FlResult result = run_fl_experiment(fl);
        write_file("accuracy_seed" + std::to_string(k) + ".csv",
                   result.to_csv(to_string(fl.mode)));
        summary << to_string(fl.mode) << "," << fl.staleness << "," << k << ","
                << result.final_mean_accuracy << "\n";
    }
    write_file("fl_summary.csv", summary.str());
}

// ---------------------------------------------------------------------------

namespace {

bool file_exists(const fs::path& p) { return fs::exists(p); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

ReportResult build_report(const std::string& artifacts_dir) {
    ReportResult result;
    std::ostringstream summary;
    summary.precision(17);
    summary << "risfl report\n";
    std::vector<std::string> gaps;
    const fs::path dir(artifacts_dir);

    if (file_exists(dir / "consensus_sweep.csv")) {
        const auto rows = parse_csv(slurp(dir / "consensus_sweep.csv"));
        std::ostringstream fig5;
        fig5 << "tau,classification\n";
        std::string last_converged, first_diverged;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            fig5 << rows[r][0] << "," << rows[r][2] << "\n";
            if (rows[r][2] == "converged") last_converged = rows[r][0];
            if (rows[r][2] == "diverged" && first_diverged.empty()) first_diverged = rows[r][0];
        }
        result.files.emplace_back("fig5-family.csv", fig5.str());
        if (!last_converged.empty() && !first_diverged.empty())
            summary << "stability boundary bracketed between tau=" << last_converged
                    << " and tau=" << first_diverged << "\n";
        else
            summary << "stability sweep present, no converged/diverged bracket in tau range\n";
    } else {
        gaps.push_back("consensus");
    }

    if (file_exists(dir / "eval.csv")) {
        const auto rows = parse_csv(slurp(dir / "eval.csv"));
        struct Agg {
            double sum = 0.0;
            double threshold = 0.0;
            int met = 0;
            int count = 0;
            std::string kind;
        };
        std::map<std::string, Agg> per_link;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            Agg& a = per_link[rows[r][1]];
            a.kind = rows[r][2];
            a.sum += std::stod(rows[r][3]);
            a.threshold = std::stod(rows[r][4]);
            a.met += rows[r][5] == "1";
            a.count += 1;
        }
        std::ostringstream fig6;
        fig6.precision(17);
        fig6 << "link,target_type,mean_achieved_bps,threshold_bps,met_fraction\n";
        for (const auto& [link, a] : per_link)
            fig6 << link << "," << a.kind << "," << a.sum / a.count << "," << a.threshold << ","
                 << static_cast<double>(a.met) / a.count << "\n";
        result.files.emplace_back("fig6-rates.csv", fig6.str());
    } else {
        gaps.push_back("eval-ris");
    }

    if (file_exists(dir / "curve.csv")) {
        const auto rows = parse_csv(slurp(dir / "curve.csv"));
        std::ostringstream fig7;
        fig7.precision(17);
        fig7 << "episode,mean_reward,rolling_mean_10\n";
        std::vector<double> window;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const double v = std::stod(rows[r][1]);
            window.push_back(v);
            if (window.size() > 10) window.erase(window.begin());
            double mean = 0.0;
            for (double w : window) mean += w;
            mean /= window.size();
            fig7 << rows[r][0] << "," << rows[r][1] << "," << mean << "\n";
        }
        result.files.emplace_back("fig7-curve.csv", fig7.str());
        summary << "ddpg curve: " << rows.size() - 1 << " episodes\n";
    } else {
        gaps.push_back("train-ris");
    }

    {
        std::map<std::pair<std::string, int>, std::pair<double, int>> acc;  // (mode, round)
        bool any = false;
        for (int k = 0; k < 64; ++k) {
            const fs::path p = dir / ("accuracy_seed" + std::to_string(k) + ".csv");
            if (!file_exists(p)) break;
            any = true;
            const auto rows = parse_csv(slurp(p));
            for (std::size_t r = 1; r < rows.size(); ++r) {
                auto& slot = acc[{rows[r][2], std::stoi(rows[r][0])}];
                slot.first += std::stod(rows[r][3]);
                slot.second += 1;
            }
        }
        if (any) {
            std::ostringstream fig10;
            fig10.precision(17);
            fig10 << "mode,round,mean_accuracy\n";
            for (const auto& [key, sum_count] : acc)
                fig10 << key.first << "," << key.second << ","
                      << sum_count.first / sum_count.second << "\n";
            result.files.emplace_back("fig10-accuracy.csv", fig10.str());
        } else {
            gaps.push_back("fl");
        }
    }

    if (file_exists(dir / "eval_summary.csv")) {
        summary << "eval summary:\n" << slurp(dir / "eval_summary.csv");
    }

    if (gaps.empty()) {
        summary << "all stages present\n";
    } else {
        for (const auto& g : gaps) summary << "gap: stage '" << g << "' has no artifacts\n";
    }
    result.summary = summary.str();
    result.files.emplace_back("summary.txt", result.summary);
    return result;
}

}  // namespace risfl
