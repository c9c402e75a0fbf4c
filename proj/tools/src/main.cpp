#include <CLI11.hpp>

#include <iostream>

#include "semot_cli/commands.hpp"
#include "semot_cli/config.hpp"

int main(int argc, char** argv) {
    using namespace semot::cli;

    CLI::App app{"Specific-entropic martingale transport: Sinkhorn solver and Poissonization checks"};
    std::string command_name;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    app.add_option("command", command_name, "solve1d | solve2d | entropy-limit | poisson-moments | ldp-check")
        ->required();
    app.add_option("--config", config_path, "YAML experiment configuration")->required();
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides poisson.seed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }

    const auto command = parse_command(command_name);
    if (!command) {
        std::cerr << "unknown command '" << command_name << "'\n" << app.help();
        return exit_usage;
    }

    ExperimentConfig config;
    try {
        config = parse_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return exit_invalid_config;
    }
    if (*out_opt) config.output_dir = out_dir;
    if (*seed_opt) config.poisson.seed = seed;
    return run_command(*command, config, std::cerr);
}
