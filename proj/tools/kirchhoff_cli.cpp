#include "kirchhoff/cli.hpp"
#include "kirchhoff/errors.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <exception>
#include <fmt/format.h>
#include <omp.h>

namespace cli = kirchhoff::cli;

int main(int argc, char** argv) {
    CLI::App app{"Multiplicity experiments for nonlocal Kirchhoff-type problems on (0,1)"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.add_option("--workers", workers, "Worker threads (overrides the config)")
        ->check(CLI::NonNegativeNumber);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"sweep", "Solve over a lambda grid, escalating mu until an interval with >= 3 solutions"},
        {"solve", "Find all critical points at the configured (lambda, mu)"},
        {"gradcheck", "Residual and Hessian consistency against finite differences"},
        {"oracle", "Compare find_all with the brute-force scan (grid.n <= 3)"},
        {"minimax", "Estimate theta and check the strict minimax gap on a sample cloud"},
        {"theta", "Estimate theta*, theta and theta-hat on a bundle-sourced cloud"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kConfigError;
    }

    try {
        cli::RunConfig cfg = config_path.empty() ? cli::parse_config(kirchhoff::io::json::object())
                                                 : cli::load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
            cfg.solver.seed = *seed;
        }
        if (out_dir) {
            cfg.out_dir = *out_dir;
        }
        if (workers) {
            cfg.workers = *workers;
        }
        if (cfg.workers > 0) {
            omp_set_num_threads(cfg.workers);
        }

        const std::string name = app.get_subcommands().front()->get_name();
        const auto start = std::chrono::steady_clock::now();
        int code = cli::kSuccess;
        if (name == "sweep") {
            code = cli::cmd_sweep(cfg);
        } else if (name == "solve") {
            code = cli::cmd_solve(cfg);
        } else if (name == "gradcheck") {
            code = cli::cmd_gradcheck(cfg);
        } else if (name == "oracle") {
            code = cli::cmd_oracle(cfg);
        } else if (name == "minimax") {
            code = cli::cmd_minimax(cfg);
        } else {
            code = cli::cmd_theta(cfg);
        }
        // Timing goes to stderr so the written reports stay reproducible.
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fmt::print(stderr, "{} finished in {:.2f} s\n", name, secs);
        return code;
    } catch (const kirchhoff::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return cli::kConfigError;
    } catch (const kirchhoff::Error& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return cli::kNumericalFailure;
    } catch (const std::exception& e) {
        fmt::print(stderr, "failure: {}\n", e.what());
        return cli::kNumericalFailure;
    }
}
