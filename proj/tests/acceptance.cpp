// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "kirchhoff/cli.hpp"
#include "kirchhoff/errors.hpp"

#include <fmt/core.h>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

using namespace kirchhoff;

namespace {

using BundlePtr = std::shared_ptr<const NonlinearityBundle>;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", note));
    }
};

BundlePtr make(ScalarFn f, std::optional<ScalarFn> g, ScalarFn k, ScalarFn h) {
    return std::make_shared<const NonlinearityBundle>(std::move(f), std::move(g), std::move(k),
                                                      std::move(h));
}

BundlePtr sine() {
    return make(ScalarFn::cosine(), std::nullopt, ScalarFn::affine_k(1.0, 1.0),
                ScalarFn::rational_h(0.0));
}

BundlePtr odd_symmetric() {
    return make(ScalarFn::cosine(), std::nullopt, ScalarFn::affine_k(1.0, 1.0),
                ScalarFn::identity_h());
}

std::vector<BundlePtr> catalog() {
    return {
        sine(),
        make(ScalarFn::cosine(), std::nullopt, ScalarFn::affine_k(1.0, 0.0), ScalarFn::identity_h()),
        make(ScalarFn::cosine(0.5, 2.0), ScalarFn::cosine(), ScalarFn::power_k(1.0, 0.5, 1.5),
             ScalarFn::rational_h(0.0)),
        make(ScalarFn::bump(1.0, 1.5, 0.2), std::nullopt, ScalarFn::affine_k(2.0, 0.5),
             ScalarFn::identity_h(2.0)),
    };
}

Field random_field(const Grid1D& grid, std::mt19937_64& rng, double radius) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Field u(grid);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = normal(rng);
    }
    return (radius / std::sqrt(norm_sq(u))) * u;
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / "kirchhoff_acceptance" / name;
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

cli::RunConfig benchmark_config() {
    return cli::load_config(std::filesystem::path(KIRCHHOFF_CONFIG_DIR) / "sine_benchmark.json");
}

Outcome a1_multiplicity() {
    Outcome out;
    auto cfg = benchmark_config();
    cfg.out_dir = scratch("a1");
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = cli::run_sweep(cfg);
    cli::write_sweep(report, cfg.out_dir);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    out.require(report.detected(), fmt::format("interval detected after {} round(s) on N = {}",
                                               report.rounds.size(), cfg.n));
    if (!report.detected()) {
        return out;
    }
    const auto& round = report.rounds.back();
    double worst_residual = 0.0;
    double closest = INFINITY;
    std::size_t fewest = SIZE_MAX;
    for (const auto& iv : round.intervals) {
        for (std::size_t r = iv.first; r <= iv.last; ++r) {
            const auto& pts = round.rows[r].set.points();
            fewest = std::min(fewest, pts.size());
            const ProblemSpec spec(cli::make_bundle(cfg.bundle), Grid1D(cfg.n), round.mu,
                                   round.rows[r].lambda);
            for (std::size_t i = 0; i < pts.size(); ++i) {
                worst_residual = std::max(worst_residual, max_abs(residual(spec, pts[i].u)));
                for (std::size_t j = i + 1; j < pts.size(); ++j) {
                    closest = std::min(closest, h1_distance(pts[i].u, pts[j].u));
                }
            }
        }
    }
    const auto& first = round.intervals.front();
    out.require(fewest >= 3, fmt::format("mu = {:.4g}, lambda in [{:.4f}, {:.4f}], min count {}",
                                         round.mu, first.lo, first.hi, fewest));
    out.require(worst_residual <= 1e-10,
                fmt::format("max residual (inf-norm) {:.3e} <= 1e-10", worst_residual));
    out.require(closest > 1e-5, fmt::format("min pairwise H1_0 distance {:.3e} > 1e-5", closest));
    out.require(secs <= 600.0, fmt::format("runtime {:.1f} s <= 600 s on {} thread(s)", secs,
                                           omp_get_max_threads()));
    return out;
}

Outcome a2_gradient() {
    Outcome out;
    const Grid1D grid(31);
    cli::GradcheckConfig gc;
    gc.draws = 5;
    double worst = 0.0;
    double worst_mu0 = 0.0;
    std::size_t draws = 0;
    std::size_t quartic_rows = 0;
    std::uint64_t seed = 11;
    for (const auto& b : catalog()) {
        for (const auto& r : cli::gradcheck_suite(b, grid, gc, seed++)) {
            if (r.name.rfind("gradient", 0) == 0) {
                worst = std::max(worst, r.value);
                ++draws;
            } else if (r.name.rfind("mu0", 0) == 0 && r.threshold == gc.quadratic_tolerance) {
                worst_mu0 = std::max(worst_mu0, r.value);
                ++quartic_rows;
            }
        }
    }
    out.require(draws == 20 && worst <= 1e-6,
                fmt::format("{} draws, worst relative error {:.3e} <= 1e-6", draws, worst));
    out.require(quartic_rows > 0 && worst_mu0 <= 1e-12,
                fmt::format("mu = 0, {} draws, worst relative error {:.3e} <= 1e-12",
                            quartic_rows, worst_mu0));
    return out;
}

Outcome a3_oracle() {
    Outcome out;
    for (const double mu : {0.0, 50.0, 500.0}) {
        auto cfg = cli::load_config(std::filesystem::path(KIRCHHOFF_CONFIG_DIR) / "oracle_n2.json");
        cfg.solve.mu = mu;
        cfg.oracle.box = 10.0;
        cfg.oracle.resolution = 201;
        const auto m = cli::run_oracle(cfg);
        out.require(m.match(), fmt::format("mu = {}: find_all {} point(s), brute force {}", mu,
                                           m.found.size(), m.truth.size()));
    }
    return out;
}

Outcome a4_minimax() {
    Outcome out;
    const SampleCloud synth{{{0.0, 0.0}, {1.0, 1.0}}, "synthetic"};
    const auto rep = prop1_check(synth, [](double t) { return t * t; }, 2.0);
    out.require(rep.rhs == 0.0, fmt::format("synthetic rhs = {}", rep.rhs));
    out.require(std::abs(rep.lhs + 0.125) <= 1e-6,
                fmt::format("synthetic lhs = {:.9f} (lambda* = {:.6f})", rep.lhs, rep.lhs_lambda));

    for (const std::uint64_t seed : {1, 2}) {
        auto cfg = cli::parse_config(io::json::object());
        cfg.seed = seed;
        const auto r = cli::run_minimax(cfg);
        out.require(r.report.lhs < -1e-9 && r.report.rhs == 0.0,
                    fmt::format("bundle cloud seed {}: theta* {:.6f}, mu {:.6f}, lhs {:.6e}, "
                                "rhs {}",
                                seed, r.theta.value, r.report.mu, r.report.lhs, r.report.rhs));
    }
    return out;
}

Outcome a5_thm3() {
    Outcome out;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const double j = 3.0 * unit(rng);
        const double mu = 0.1 + 9.9 * (0.5 + 0.5 * unit(rng));
        const double nu = 2.0 * unit(rng);
        std::vector<double> jp(4);
        for (auto& x : jp) {
            x = unit(rng);
        }
        const double scale = mu * std::exp(j - nu) * max_abs(jp) + mu * max_abs(jp);
        worst = std::max(worst, thm3_residual_identity(j, jp, mu, nu) / scale);
    }
    out.require(worst <= 1e-13, fmt::format("residual identity, 10^4 trials, worst relative "
                                            "{:.3e} <= 1e-13",
                                            worst));

    const std::size_t m = 200001;
    std::vector<double> psi(m);
    std::vector<double> jv(m);
    std::vector<double> xs(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = -20.0 + 40.0 * static_cast<double>(i) / static_cast<double>(m - 1);
        psi[i] = 0.5 * xs[i] * xs[i];
        jv[i] = 1.0 - std::cos(xs[i]);
    }
    const auto c = thm3_condition(psi, jv, 1.0);
    const double wx = std::abs(xs[c.left_index]);
    out.require(c.holds, fmt::format("condition holds for psi = x^2/2, J = 1 - cos x, mu = 1 "
                                     "(left {:.6f}, right {:.6f})",
                                     c.left_inf, c.right_inf));
    out.require(std::abs(wx - std::numbers::pi) <= 1e-3,
                fmt::format("left witness |x| = {:.5f}, expected pi within 1e-3", wx));
    out.require(std::abs(c.left_inf + 1.454) <= 1e-3,
                fmt::format("left value {:.5f}, expected -1.454 within 1e-3", c.left_inf));

    const auto iv = thm3_interval_map(2.0, {0.1, 0.2});
    out.require(std::abs(iv.lo - 1.63746) <= 1e-5 && std::abs(iv.hi - 1.80967) <= 1e-5,
                fmt::format("interval map (2, (0.1, 0.2)) = ({:.6f}, {:.6f})", iv.lo, iv.hi));
    return out;
}

Outcome a6_sigma() {
    Outcome out;
    const std::pair<const char*, ScalarFn> ks[] = {
        {"k = 1 + t", ScalarFn::affine_k(1.0, 1.0)},
        {"k = 1", ScalarFn::affine_k(1.0, 0.0)},
        {"k = 2 + t/2", ScalarFn::affine_k(2.0, 0.5)},
        {"k = 1 + t^1.5/2", ScalarFn::power_k(1.0, 0.5, 1.5)},
    };
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> radius(0.0, 3.0);
    for (const auto& [label, k] : ks) {
        const auto b = make(ScalarFn::cosine(), std::nullopt, k, ScalarFn::rational_h(0.0));
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const Grid1D grid(5 + static_cast<std::size_t>(t % 4) * 10);
            worst = std::max(worst, t_operator_check(*b, random_field(grid, rng, radius(rng))));
        }
        out.require(worst <= 1e-9, fmt::format("{}: worst {:.3e} <= 1e-9", label, worst));
    }
    return out;
}

Outcome a7_symmetry() {
    Outcome out;
    const auto b = odd_symmetric();
    const auto [lo, hi] = ProblemSpec::lambda_range(*b);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Grid1D grid(7 + static_cast<std::size_t>(t % 5) * 8);
        const double lambda = 0.999 * (lo + (hi - lo) * unit(rng));
        const double mu = 200.0 * unit(rng);
        const Field u = random_field(grid, rng, 0.1 + 2.9 * unit(rng));
        const auto a = residual(ProblemSpec(b, grid, mu, lambda), -1.0 * u);
        const auto c = residual(ProblemSpec(b, grid, mu, -lambda), u);
        for (std::size_t i = 0; i < a.size(); ++i) {
            worst = std::max(worst, std::abs(a[i] + c[i]));
        }
    }
    out.require(worst <= 1e-12, fmt::format("residual transport, 50 draws, worst {:.3e}", worst));

    auto cfg = cli::parse_config(io::json::parse(R"({
        "bundle": {"h": {"kind": "identity-h", "params": [1.0]}},
        "grid": {"n": 15},
        "sweep": {"lambda_count": 21, "mu": 400.0}
    })"));
    const auto sweep = cli::run_sweep(cfg);
    const auto& rows = sweep.rounds.back().rows;
    const auto& ivs = sweep.rounds.back().intervals;
    const double step = rows.size() > 1 ? rows[1].lambda - rows[0].lambda : 0.0;
    bool mirrored = !ivs.empty();
    for (const auto& iv : ivs) {
        bool found = false;
        for (const auto& other : ivs) {
            found = found || (std::abs(other.lo + iv.hi) <= step + 1e-12 &&
                              std::abs(other.hi + iv.lo) <= step + 1e-12);
        }
        mirrored = mirrored && found;
    }
    std::string listing;
    for (const auto& iv : ivs) {
        listing += fmt::format(" [{:.3f}, {:.3f}]", iv.lo, iv.hi);
    }
    out.require(mirrored, fmt::format("sweep intervals at mu = 400, N = 15:{}",
                                      listing.empty() ? " none" : listing));
    return out;
}

Outcome a8_determinism() {
    Outcome out;
    auto cfg = benchmark_config();
    cfg.n = 15;
    cfg.sweep.lambda_count = 21;
    const int saved = omp_get_max_threads();
    std::vector<std::filesystem::path> dirs;
    for (const int workers : {1, 4}) {
        omp_set_num_threads(workers);
        cfg.out_dir = scratch(fmt::format("a8_w{}", workers));
        cli::cmd_sweep(cfg);
        dirs.push_back(cfg.out_dir);
    }
    omp_set_num_threads(saved);
    for (const char* f : {"sweep_rows.csv", "sweep_summary.json", "sweep_solutions.json"}) {
        const auto a = slurp(dirs[0] / f);
        out.require(!a.empty() && a == slurp(dirs[1] / f),
                    fmt::format("{} identical for 1 and 4 workers ({} bytes)", f, a.size()));
    }
    return out;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"A1", a1_multiplicity}, {"A2", a2_gradient}, {"A3", a3_oracle},
        {"A4", a4_minimax},      {"A5", a5_thm3},     {"A6", a6_sigma},
        {"A7", a7_symmetry},     {"A8", a8_determinism},
    };
    bool all = true;
    for (const auto& [id, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.require(false, fmt::format("exception: {}", e.what()));
        }
        all = all && o.pass;
        fmt::print("{} {}\n", id, o.pass ? "PASS" : "FAIL");
        for (const auto& n : o.notes) {
            fmt::print("    {}\n", n);
        }
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
