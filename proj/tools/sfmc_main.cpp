// Command-line front end: evaluates minimax bound tables, builds and
// verifies packing sets, and runs Monte-Carlo risk sweeps. See README for
// the config file schema.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sfmc/commands.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to the JSON config file")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker thread cap (overrides config)");
}

sfmc::ExperimentConfig load(const CommonArgs& args) {
    sfmc::ExperimentConfig config = sfmc::load_config_file(args.config_path);
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    if (args.seed_set) config.master_seed = args.seed;
    if (args.threads > 0) config.threads = args.threads;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimax lower-bound toolkit for sparse-factor matrix completion"};
    app.require_subcommand(1);

    CommonArgs bound_args;
    CommonArgs pack_args;
    CommonArgs risk_args;
    CommonArgs kl_args;
    add_common(app.add_subcommand("bound", "evaluate the lower/upper bound table"),
               bound_args);
    add_common(app.add_subcommand("pack", "build and verify packing sets"), pack_args);
    add_common(app.add_subcommand("risk", "run a Monte-Carlo risk sweep"), risk_args);
    add_common(app.add_subcommand("kl-check", "verify channel KL properties on a grid"),
               kl_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("bound")) return sfmc::cmd_bound(load(bound_args), std::cout);
        if (app.got_subcommand("pack")) return sfmc::cmd_pack(load(pack_args), std::cout);
        if (app.got_subcommand("risk")) return sfmc::cmd_risk(load(risk_args), std::cout);
        if (app.got_subcommand("kl-check"))
            return sfmc::cmd_kl_check(load(kl_args), std::cout);
    } catch (const sfmc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return sfmc::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sfmc::kExitVerificationFailure;
    }
    return sfmc::kExitConfigError;
}
