// Command-line driver for heat-flow experiments on unit octonion sections:
// `run` integrates a configured flow and emits CSV diagnostics, `verify`
// executes the identity/invariant suite, `inspect` dumps checkpoint headers.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "g2flow/config.hpp"
#include "g2flow/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitInvariant = 4;

int do_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    nlohmann::json j = g2flow::load_config_json(config_path);
    g2flow::apply_overrides(j, overrides);
    g2flow::RunConfig cfg = g2flow::parse_config(j);
    g2flow::RunOutcome outcome = g2flow::run_flow(cfg, &std::cout);
    return outcome.exit_code == 0 ? kExitOk : kExitBlowup;
}

int do_verify(const std::string& config_path, bool inject_phi_fault) {
    nlohmann::json j = g2flow::load_config_json(config_path);
    g2flow::RunConfig cfg = g2flow::parse_config(j);
    auto results = g2flow::verify_suite(cfg.lattice, inject_phi_fault);
    bool all_ok = true;
    for (const auto& r : results) {
        std::printf("%s %-36s measured=%.6e %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.measured, r.note.c_str());
        all_ok = all_ok && r.passed;
    }
    if (!all_ok) {
        std::printf("verify: invariant failures detected\n");
        return kExitInvariant;
    }
    std::printf("verify: all checks passed\n");
    return kExitOk;
}

int do_inspect(const std::string& checkpoint_path) {
    std::cout << g2flow::inspect_checkpoint(checkpoint_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat flow laboratory for isometric G2-structures on flat tori"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    auto* run_cmd = app.add_subcommand("run", "integrate a flow described by a JSON config");
    run_cmd->add_option("config", config_path, "path to JSON config")->required();
    run_cmd->add_option("overrides", overrides, "key=value overrides, dotted paths");

    std::string verify_config;
    bool inject_phi_fault = false;
    auto* verify_cmd = app.add_subcommand("verify", "run the identity/invariant suite");
    verify_cmd->add_option("config", verify_config, "path to JSON config")->required();
    verify_cmd->add_flag("--inject-phi-fault", inject_phi_fault,
                         "corrupt the structure tensors to exercise failure detection");

    std::string checkpoint_path;
    auto* inspect_cmd = app.add_subcommand("inspect", "print checkpoint header and field stats");
    inspect_cmd->add_option("checkpoint", checkpoint_path, "path to checkpoint file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run_cmd->parsed()) return do_run(config_path, overrides);
        if (verify_cmd->parsed()) return do_verify(verify_config, inject_phi_fault);
        if (inspect_cmd->parsed()) return do_inspect(checkpoint_path);
    } catch (const g2flow::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const g2flow::CheckpointError& e) {
        std::fprintf(stderr, "checkpoint error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
