// crane_lab: command-line front end for the crane scenario commands.

#include <CLI11.hpp>

#include <iostream>

#include "crane/cli.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path, const std::string& out, std::uint64_t seed,
             int jobs)
{
    using namespace crane;
    try {
        cli::RunContext ctx;
        ctx.config = load_config(config_path);
        ctx.out = out.empty() ? ctx.config.output_dir : out;
        ctx.seed = seed;
        ctx.jobs = jobs;
        if (command == "validate")
            return cli::cmd_validate(ctx);
        if (command == "sweep")
            return cli::cmd_sweep(ctx);
        require_strict(ctx.config.model);
        if (command == "simulate")
            return cli::cmd_simulate(ctx);
        if (command == "spectrum")
            return cli::cmd_spectrum(ctx);
        if (command == "resolvent")
            return cli::cmd_resolvent(ctx);
        return cli::cmd_decay(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ModelError& e) {
        std::cerr << "model rejected: " << e.what() << '\n';
        return 1;
    } catch (const DecayFitError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Boundary-controlled crane cable with delayed feedback: simulation and spectral analysis"};
    app.require_subcommand(1, 1);

    std::string config_path, out;
    std::uint64_t seed = 1;
    int jobs = 1;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"validate", "check the admissibility constraints and print their margins"},
        {"simulate", "integrate the closed loop and write trajectory, snapshots and summary"},
        {"spectrum", "eigenvalues of the full and restricted generators, dissipativity check"},
        {"resolvent", "resolvent norm along the imaginary axis"},
        {"decay", "simulate and fit the decay rate of the deviation"},
        {"sweep", "cartesian product over gain values, one directory per point"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "scenario INI file")->required();
        sub->add_option("--out", out, "output directory (default: output.dir of the config)");
        sub->add_option("--seed", seed, "seed for randomized checks")->capture_default_str();
        sub->add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return dispatch(app.get_subcommands().front()->get_name(), config_path, out, seed, jobs);
}
