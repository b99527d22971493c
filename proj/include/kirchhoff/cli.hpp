#pragma once

#include "kirchhoff/io.hpp"
#include "kirchhoff/minimax.hpp"
#include "kirchhoff/solver.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kirchhoff::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kNotDetected = 3,  // no interval after escalation, or a failed check
    kNumericalFailure = 4,
};

struct FnSpec {
    std::string kind;
    std::vector<double> params;
};

struct BundleConfig {
    FnSpec f{"cosine", {}};
    std::optional<FnSpec> g;
    FnSpec k{"affine-k", {1.0, 1.0}};
    FnSpec h{"rational-h", {}};
};

struct Escalation {
    std::optional<double> mu0;  // default 1.5 * theta*_est
    double factor = 2.0;
    int rounds = 6;
};

struct SweepConfig {
    std::size_t lambda_count = 41;
    std::optional<std::pair<double, double>> lambda_range;  // default: full admissible range
    std::optional<double> mu;                               // fixed mu disables escalation
    Escalation escalation;
    std::size_t min_run = 2;  // consecutive rows with count >= 3 forming an interval
};

struct PhiSpec {
    std::string kind = "bundle-H";  // or "abs-power" with params [p]
    std::vector<double> params;
};

struct MinimaxConfig {
    std::size_t samples = 10000;
    std::vector<double> radii = {1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0};
    int refine_iterations = 200;
    std::size_t lambda_grid = 10000;
    std::optional<double> mu;  // default 2 * theta estimate
    double mu_factor = 2.0;
    std::optional<std::vector<CloudEntry>> entries;  // synthetic cloud
    std::optional<std::string> cloud_csv;
    PhiSpec phi;
    std::size_t grid_n = 15;  // grid of the bundle-sourced cloud
};

struct GradcheckConfig {
    std::size_t draws = 20;
    double step = 1e-5;
    double tolerance = 1e-6;
    double quadratic_tolerance = 1e-12;
    double residual_scale = 1.0;  // fault injection hook
    double mu_max = 100.0;
};

struct SolveConfig {
    double lambda = 0.0;
    double mu = 0.0;
};

struct OracleConfig {
    double box = 10.0;
    std::size_t resolution = 201;
    double match_tol = 1e-3;
};

struct RunConfig {
    BundleConfig bundle;
    std::size_t n = 63;
    SolverConfig solver;
    SweepConfig sweep;
    SolveConfig solve;
    MinimaxConfig minimax;
    GradcheckConfig gradcheck;
    OracleConfig oracle;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;
    int workers = 0;  // 0: OpenMP default
};

/// Throws ConfigError on a schema violation.
RunConfig parse_config(const io::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Builds the bundle and runs check_admissibility; ConfigError on failure.
std::shared_ptr<const NonlinearityBundle> make_bundle(const BundleConfig& cfg);

/// Lambda grid over the configured range, uniform and inclusive of its ends.
std::vector<double> lambda_grid(const RunConfig& cfg, const NonlinearityBundle& bundle);

struct SweepRow {
    double lambda = 0.0;
    std::size_t count = 0;
    std::vector<double> energies;
    std::vector<double> norms;
    double max_residual = 0.0;
    std::string error;  // solver failure; the row then has count 0
    CriticalPointSet set;
};

struct DetectedInterval {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t first = 0;
    std::size_t last = 0;
};

/// Maximal runs of consecutive rows with count >= 3 and length >= min_run.
std::vector<DetectedInterval> detect_intervals(const std::vector<SweepRow>& rows,
                                               std::size_t min_run);

struct SweepRound {
    double mu = 0.0;
    std::vector<SweepRow> rows;
    std::vector<DetectedInterval> intervals;
    double empirical_rho = 0.0;  // largest norm over rows inside detected intervals
};

struct SweepReport {
    std::vector<SweepRound> rounds;
    std::optional<double> theta_star_estimate;  // set when mu0 came from it
    [[nodiscard]] bool detected() const {
        return !rounds.empty() && !rounds.back().intervals.empty();
    }
};

/// Solves every lambda row at a fixed mu; rows run concurrently, output is ordered by lambda.
SweepRound sweep_round(const RunConfig& cfg, std::shared_ptr<const NonlinearityBundle> bundle,
                       double mu);
SweepReport run_sweep(const RunConfig& cfg);

/// Header "lambda,count,energies,norms,max_residual"; lists are ';'-separated.
void write_rows_csv(std::ostream& os, const std::vector<SweepRow>& rows);
io::json to_json(const SweepReport& report);
/// Writes sweep_rows.csv, sweep_summary.json and sweep_solutions.json.
void write_sweep(const SweepReport& report, const std::filesystem::path& dir);
/// Recomputes the residual of every stored solution; returns the largest.
double reverify_sweep(const RunConfig& cfg, const std::filesystem::path& dir);

struct CheckRow {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    [[nodiscard]] bool pass() const { return value <= threshold; }
};

/// Gradient and Hessian consistency on random draws of (lambda, mu, u, v).
std::vector<CheckRow> gradcheck_suite(std::shared_ptr<const NonlinearityBundle> bundle,
                                      const Grid1D& grid, const GradcheckConfig& cfg,
                                      std::uint64_t seed);

struct OracleMatch {
    CriticalPointSet found;
    CriticalPointSet truth;
    std::vector<std::size_t> missed;    // truth points without a partner in found
    std::vector<std::size_t> spurious;  // found points without a partner in truth
    [[nodiscard]] bool match() const {
        return missed.empty() && spurious.empty() && found.size() == truth.size();
    }
};

OracleMatch run_oracle(const RunConfig& cfg);

struct MinimaxResult {
    SampleCloud cloud;
    ThetaEstimate theta;
    MinimaxReport report;
};

MinimaxResult run_minimax(const RunConfig& cfg);

struct ThetaResult {
    ThetaEstimate theta_star;
    ThetaEstimate theta;
    ThetaEstimate theta_hat;
};

ThetaResult run_theta(const RunConfig& cfg);

/// Entry point shared by the executable; returns the process exit code.
int cmd_sweep(const RunConfig& cfg);
int cmd_solve(const RunConfig& cfg);
int cmd_gradcheck(const RunConfig& cfg);
int cmd_oracle(const RunConfig& cfg);
int cmd_minimax(const RunConfig& cfg);
int cmd_theta(const RunConfig& cfg);

}  // namespace kirchhoff::cli
