#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "risfl/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStageFailure = 1;
constexpr int kExitConfigError = 2;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

risfl::ScenarioConfig load_config(const GlobalOptions& opts) {
    risfl::ScenarioConfig cfg;
    if (!opts.config_path.empty()) cfg = risfl::ScenarioConfig::parse_file(opts.config_path);
    if (opts.seed_set) {
        cfg.seed = opts.seed;
        cfg.explicit_keys.insert("seed");
    }
    return cfg;
}

int run_stages(const GlobalOptions& opts, const std::vector<std::string>& stages) {
    risfl::ScenarioConfig cfg;
    try {
        cfg = load_config(opts);
    } catch (const risfl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    risfl::ScenarioRunner runner(cfg, opts.out_dir);
    runner.write_manifest();
    for (const auto& stage : stages) {
        try {
            runner.run_stage(stage);
        } catch (const risfl::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfigError;
        } catch (const std::exception& e) {
            std::cerr << "stage " << stage << " failed: " << e.what() << "\n";
            return kExitStageFailure;
        }
        std::cout << "stage " << stage << " done -> " << opts.out_dir << "\n";
    }
    return kExitOk;
}

int run_report(const GlobalOptions& opts) {
    try {
        const auto report = risfl::build_report(opts.out_dir);
        for (const auto& [name, contents] : report.files) {
            std::ofstream out(std::filesystem::path(opts.out_dir) / name, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + name);
            out << contents;
        }
        std::cout << report.summary;
    } catch (const std::exception& e) {
        std::cerr << "report failed: " << e.what() << "\n";
        return kExitStageFailure;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-assisted topology control and distributed FL simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // --config/--out/--seed are accepted after the subcommand

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "scenario config file (key = value lines)");
    app.add_option("--out", opts.out_dir, "artifact output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", opts.seed, "master seed (overrides the config)");

    // Subcommand name -> stage list. `consensus` maps to the tau sweep stage.
    const std::map<std::string, std::vector<std::string>> commands{
        {"spectrum", {"spectrum"}},   {"audit", {"audit"}}, {"plan", {"plan"}},
        {"consensus", {"consensus"}}, {"train-ris", {"train-ris"}},
        {"eval-ris", {"eval-ris"}},   {"fl", {"fl"}},
    };
    for (const auto& [name, stages] : commands)
        app.add_subcommand(name, "run the " + name + " stage");
    auto* all = app.add_subcommand("run-all", "run every stage in order");
    (void)all;
    app.add_subcommand("report", "distill figure-family CSVs from an artifact directory");

    CLI11_PARSE(app, argc, argv);
    opts.seed_set = seed_opt->count() > 0;

    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "report") return run_report(opts);
    if (sub == "run-all") {
        std::vector<std::string> stages{"spectrum", "audit",    "plan", "consensus",
                                        "train-ris", "eval-ris", "fl"};
        return run_stages(opts, stages);
    }
    return run_stages(opts, commands.at(sub));
}
