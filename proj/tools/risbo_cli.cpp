#include <chrono>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "risbo/experiments.hpp"
#include "risbo/result_table.hpp"

namespace {

risbo::ExperimentConfig load_with_overrides(const std::string& config_path,
                                            const std::string& scenario_override,
                                            long long seed_override, int realizations_override,
                                            const std::string& out_override) {
    auto cfg = risbo::load_experiment_config(risbo::ConfigFile::parse_file(config_path));
    if (!scenario_override.empty()) {
        const auto s = risbo::scenario_from_string(scenario_override);
        if (!s) throw risbo::ConfigError("unknown scenario '" + scenario_override + "'");
        cfg.scenario = *s;
    }
    if (seed_override >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed_override);
    if (realizations_override > 0) cfg.realizations = realizations_override;
    if (!out_override.empty()) cfg.output_path = out_override;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-assisted downlink transmission design via Bayesian optimization"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scenario_override;
    std::string out_override;
    long long seed_override = -1;
    int realizations_override = 0;

    auto* run = app.add_subcommand("run", "Run a scenario and write its CSV result table");
    run->add_option("config", config_path, "Path to the experiment config file")->required();
    run->add_option("--scenario", scenario_override, "Override the configured scenario");
    run->add_option("--seed", seed_override, "Override the base seed");
    run->add_option("--realizations", realizations_override, "Override the realization count");
    run->add_option("--out", out_override, "Override the output CSV path");

    auto* validate = app.add_subcommand("validate", "Parse and validate a config, then exit");
    validate->add_option("config", config_path, "Path to the experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            const auto cfg = load_with_overrides(config_path, "", -1, 0, "");
            std::printf("ok: scenario=%s realizations=%d seed=%llu out=%s\n",
                        risbo::to_string(cfg.scenario), cfg.realizations,
                        static_cast<unsigned long long>(cfg.base_seed), cfg.output_path.c_str());
            return 0;
        }
        const auto cfg = load_with_overrides(config_path, scenario_override, seed_override,
                                             realizations_override, out_override);
        const auto start = std::chrono::steady_clock::now();
        const risbo::ResultTable table = risbo::run_scenario(cfg);
        risbo::emit_results(table, cfg.output_path);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("wrote %zu rows to %s (%.1f s)\n", table.rows.size(), cfg.output_path.c_str(),
                    secs);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
