#include "kirchhoff/cli.hpp"

#include "kirchhoff/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <type_traits>

namespace kirchhoff::cli {

using io::json;

namespace {

// ---------------------------------------------------------------- config

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(fmt::format("{}: expected an object", where));
    }
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const auto a : allowed) {
            ok = ok || key == a;
        }
        if (!ok) {
            throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
        }
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return;
    }
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        const bool ok = std::is_unsigned_v<T> ? it->is_number_unsigned() : it->is_number_integer();
        if (!ok) {
            throw ConfigError(fmt::format("{}.{}: expected a{} integer, got {}", where, key,
                                          std::is_unsigned_v<T> ? " non-negative" : "n",
                                          it->dump()));
        }
    }
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("{}.{}: wrong type ({})", where, key, it->type_name()));
    }
}

template <class T>
void read(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return;
    }
    T value{};
    read(obj, key, value, where);
    out = std::move(value);
}

FnSpec parse_fn(const json& j, const std::string& where) {
    reject_unknown(j, where, {"kind", "params"});
    FnSpec fn;
    if (!j.contains("kind")) {
        throw ConfigError(fmt::format("{}: 'kind' is required", where));
    }
    read(j, "kind", fn.kind, where);
    read(j, "params", fn.params, where);
    return fn;
}

HessianMode parse_hessian(const std::string& s) {
    if (s == "auto") {
        return HessianMode::Auto;
    }
    if (s == "analytic") {
        return HessianMode::Analytic;
    }
    if (s == "fd") {
        return HessianMode::FiniteDifference;
    }
    throw ConfigError(fmt::format("solver.hessian: unknown mode '{}'", s));
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigError(what);
    }
}

}  // namespace

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    reject_unknown(doc, "config",
                   {"bundle", "grid", "seed", "workers", "out_dir", "solver", "sweep", "solve",
                    "minimax", "gradcheck", "oracle"});

    if (doc.contains("bundle")) {
        const json& b = doc["bundle"];
        reject_unknown(b, "bundle", {"f", "g", "k", "h"});
        if (b.contains("f")) cfg.bundle.f = parse_fn(b["f"], "bundle.f");
        if (b.contains("g") && !b["g"].is_null()) cfg.bundle.g = parse_fn(b["g"], "bundle.g");
        if (b.contains("k")) cfg.bundle.k = parse_fn(b["k"], "bundle.k");
        if (b.contains("h")) cfg.bundle.h = parse_fn(b["h"], "bundle.h");
    }
    if (doc.contains("grid")) {
        reject_unknown(doc["grid"], "grid", {"n"});
        read(doc["grid"], "n", cfg.n, "grid");
    }
    read(doc, "seed", cfg.seed, "config");
    cfg.solver.seed = cfg.seed;
    read(doc, "workers", cfg.workers, "config");
    std::string out_dir = cfg.out_dir.string();
    read(doc, "out_dir", out_dir, "config");
    cfg.out_dir = out_dir;

    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        const std::string w = "solver";
        reject_unknown(s, w,
                       {"n_starts", "newton_tol", "max_newton", "deflation_power",
                        "deflation_shift", "distinct_tol", "start_radius", "max_descent",
                        "max_rounds", "hessian"});
        auto& sc = cfg.solver;
        read(s, "n_starts", sc.n_starts, w);
        read(s, "newton_tol", sc.newton_tol, w);
        read(s, "max_newton", sc.max_newton, w);
        read(s, "deflation_power", sc.deflation_power, w);
        read(s, "deflation_shift", sc.deflation_shift, w);
        read(s, "distinct_tol", sc.distinct_tol, w);
        read(s, "start_radius", sc.start_radius, w);
        read(s, "max_descent", sc.max_descent, w);
        read(s, "max_rounds", sc.max_rounds, w);
        std::string mode = "auto";
        read(s, "hessian", mode, w);
        sc.hessian = parse_hessian(mode);
    }

    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        const std::string w = "sweep";
        reject_unknown(s, w, {"lambda_count", "lambda_range", "mu", "escalation", "min_run"});
        read(s, "lambda_count", cfg.sweep.lambda_count, w);
        std::optional<std::vector<double>> range;
        read(s, "lambda_range", range, w);
        if (range) {
            require(range->size() == 2, "sweep.lambda_range: expected [lo, hi]");
            cfg.sweep.lambda_range = std::pair{(*range)[0], (*range)[1]};
        }
        read(s, "mu", cfg.sweep.mu, w);
        read(s, "min_run", cfg.sweep.min_run, w);
        if (s.contains("escalation")) {
            const json& e = s["escalation"];
            reject_unknown(e, "sweep.escalation", {"mu0", "factor", "rounds"});
            read(e, "mu0", cfg.sweep.escalation.mu0, "sweep.escalation");
            read(e, "factor", cfg.sweep.escalation.factor, "sweep.escalation");
            read(e, "rounds", cfg.sweep.escalation.rounds, "sweep.escalation");
        }
    }

    if (doc.contains("solve")) {
        reject_unknown(doc["solve"], "solve", {"lambda", "mu"});
        read(doc["solve"], "lambda", cfg.solve.lambda, "solve");
        read(doc["solve"], "mu", cfg.solve.mu, "solve");
    }

    if (doc.contains("minimax")) {
        const json& m = doc["minimax"];
        const std::string w = "minimax";
        reject_unknown(m, w,
                       {"samples", "radii", "refine_iterations", "lambda_grid", "mu", "mu_factor",
                        "entries", "cloud_csv", "phi", "grid_n"});
        auto& mc = cfg.minimax;
        read(m, "samples", mc.samples, w);
        read(m, "radii", mc.radii, w);
        read(m, "refine_iterations", mc.refine_iterations, w);
        read(m, "lambda_grid", mc.lambda_grid, w);
        read(m, "mu", mc.mu, w);
        read(m, "mu_factor", mc.mu_factor, w);
        read(m, "cloud_csv", mc.cloud_csv, w);
        read(m, "grid_n", mc.grid_n, w);
        std::optional<std::vector<std::vector<double>>> entries;
        read(m, "entries", entries, w);
        if (entries) {
            std::vector<CloudEntry> out;
            for (const auto& e : *entries) {
                require(e.size() == 2, "minimax.entries: each entry is [gamma, j]");
                out.push_back({e[0], e[1]});
            }
            mc.entries = std::move(out);
        }
        if (m.contains("phi")) {
            reject_unknown(m["phi"], "minimax.phi", {"kind", "params"});
            read(m["phi"], "kind", mc.phi.kind, "minimax.phi");
            read(m["phi"], "params", mc.phi.params, "minimax.phi");
        }
    }

    if (doc.contains("gradcheck")) {
        const json& g = doc["gradcheck"];
        const std::string w = "gradcheck";
        reject_unknown(g, w,
                       {"draws", "step", "tolerance", "quadratic_tolerance", "residual_scale",
                        "mu_max"});
        auto& gc = cfg.gradcheck;
        read(g, "draws", gc.draws, w);
        read(g, "step", gc.step, w);
        read(g, "tolerance", gc.tolerance, w);
        read(g, "quadratic_tolerance", gc.quadratic_tolerance, w);
        read(g, "residual_scale", gc.residual_scale, w);
        read(g, "mu_max", gc.mu_max, w);
    }

    if (doc.contains("oracle")) {
        const json& o = doc["oracle"];
        reject_unknown(o, "oracle", {"box", "resolution", "match_tol"});
        read(o, "box", cfg.oracle.box, "oracle");
        read(o, "resolution", cfg.oracle.resolution, "oracle");
        read(o, "match_tol", cfg.oracle.match_tol, "oracle");
    }

    require(cfg.n >= 1, "grid.n must be at least 1");
    require(cfg.workers >= 0, "workers must be non-negative");
    try {
        cfg.solver.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    require(cfg.sweep.lambda_count >= 1, "sweep.lambda_count must be at least 1");
    require(cfg.sweep.min_run >= 1, "sweep.min_run must be at least 1");
    require(!cfg.sweep.mu || *cfg.sweep.mu >= 0.0, "sweep.mu must be non-negative");
    require(cfg.sweep.escalation.factor > 1.0, "sweep.escalation.factor must exceed 1");
    require(cfg.sweep.escalation.rounds >= 1, "sweep.escalation.rounds must be at least 1");
    require(!cfg.sweep.escalation.mu0 || *cfg.sweep.escalation.mu0 > 0.0,
            "sweep.escalation.mu0 must be positive");
    require(cfg.solve.mu >= 0.0, "solve.mu must be non-negative");
    require(cfg.minimax.samples >= 2, "minimax.samples must be at least 2");
    require(!cfg.minimax.radii.empty(), "minimax.radii must not be empty");
    require(cfg.minimax.lambda_grid >= 2, "minimax.lambda_grid must be at least 2");
    require(cfg.minimax.grid_n >= 1, "minimax.grid_n must be at least 1");
    require(!cfg.minimax.mu || *cfg.minimax.mu >= 0.0, "minimax.mu must be non-negative");
    require(cfg.minimax.phi.kind == "bundle-H" || cfg.minimax.phi.kind == "abs-power",
            fmt::format("minimax.phi.kind: unknown '{}'", cfg.minimax.phi.kind));
    require(cfg.gradcheck.draws >= 1, "gradcheck.draws must be at least 1");
    require(cfg.gradcheck.step > 0.0, "gradcheck.step must be positive");
    require(cfg.oracle.resolution >= 3, "oracle.resolution must be at least 3");
    require(cfg.oracle.box > 0.0, "oracle.box must be positive");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return parse_config(doc);
}

std::shared_ptr<const NonlinearityBundle> make_bundle(const BundleConfig& cfg) {
    std::shared_ptr<const NonlinearityBundle> bundle;
    try {
        auto fn = [](const FnSpec& s) { return ScalarFn::from_kind(s.kind, s.params); };
        std::optional<ScalarFn> g;
        if (cfg.g) {
            g = fn(*cfg.g);
        }
        bundle = std::make_shared<const NonlinearityBundle>(fn(cfg.f), std::move(g), fn(cfg.k),
                                                            fn(cfg.h));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(fmt::format("bundle: {}", e.what()));
    }
    const auto report = check_admissibility(*bundle);
    if (!report.pass) {
        throw ConfigError(fmt::format("bundle is not admissible: {}", report.violated_clause));
    }
    return bundle;
}

std::vector<double> lambda_grid(const RunConfig& cfg, const NonlinearityBundle& bundle) {
    const auto full = ProblemSpec::lambda_range(bundle);
    auto [lo, hi] = cfg.sweep.lambda_range.value_or(full);
    if (!(lo >= full.first && hi <= full.second && lo <= hi)) {
        throw ConfigError(fmt::format("sweep.lambda_range [{}, {}] is not inside ({}, {})", lo,
                                      hi, bundle.alpha_f(), bundle.beta_f()));
    }
    const std::size_t n = cfg.sweep.lambda_count;
    if (n == 1) {
        return {0.5 * (lo + hi)};
    }
    // Weighted form keeps a symmetric range symmetric to the last bit.
    std::vector<double> out(n);
    const double m = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i);
        out[i] = (lo * (m - t) + hi * t) / m;
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<DetectedInterval> detect_intervals(const std::vector<SweepRow>& rows,
                                               std::size_t min_run) {
    std::vector<DetectedInterval> out;
    std::size_t i = 0;
    while (i < rows.size()) {
        if (rows[i].count < 3) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < rows.size() && rows[j + 1].count >= 3) {
            ++j;
        }
        if (j - i + 1 >= min_run) {
            out.push_back({rows[i].lambda, rows[j].lambda, i, j});
        }
        i = j + 1;
    }
    return out;
}

SweepRound sweep_round(const RunConfig& cfg, std::shared_ptr<const NonlinearityBundle> bundle,
                       double mu) {
    const auto lambdas = lambda_grid(cfg, *bundle);
    const Grid1D grid(cfg.n);
    SweepRound round;
    round.mu = mu;
    round.rows.resize(lambdas.size());
    const auto count = static_cast<std::ptrdiff_t>(lambdas.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        SweepRow& row = round.rows[static_cast<std::size_t>(i)];
        row.lambda = lambdas[static_cast<std::size_t>(i)];
        try {
            const ProblemSpec spec(bundle, grid, mu, row.lambda);
            row.set = find_all(spec, cfg.solver);
            for (const auto& p : row.set.points()) {
                row.energies.push_back(p.energy);
                row.norms.push_back(p.norm);
                row.max_residual = std::max(row.max_residual, p.residual_norm);
            }
            row.count = row.set.size();
        } catch (const Error& e) {
            row = SweepRow{};
            row.lambda = lambdas[static_cast<std::size_t>(i)];
            row.max_residual = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
        }
    }
    round.intervals = detect_intervals(round.rows, cfg.sweep.min_run);
    for (const auto& iv : round.intervals) {
        for (std::size_t i = iv.first; i <= iv.last; ++i) {
            round.empirical_rho = std::max(round.empirical_rho, round.rows[i].set.max_norm());
        }
    }
    return round;
}

namespace {

BundleCloud bundle_cloud(const RunConfig& cfg, const NonlinearityBundle& bundle,
                         std::size_t grid_n) {
    CloudOptions opts;
    opts.samples = cfg.minimax.samples;
    opts.radii = cfg.minimax.radii;
    opts.seed = cfg.seed;
    return make_bundle_cloud(bundle, Grid1D(grid_n), opts);
}

}  // namespace

SweepReport run_sweep(const RunConfig& cfg) {
    const auto bundle = make_bundle(cfg.bundle);
    SweepReport report;
    if (cfg.sweep.mu) {
        report.rounds.push_back(sweep_round(cfg, bundle, *cfg.sweep.mu));
        return report;
    }
    double mu0 = 0.0;
    if (cfg.sweep.escalation.mu0) {
        mu0 = *cfg.sweep.escalation.mu0;
    } else {
        const auto cloud = bundle_cloud(cfg, *bundle, cfg.n);
        const auto est = estimate_theta_star(*bundle, cloud, cfg.minimax.refine_iterations);
        report.theta_star_estimate = est.value;
        mu0 = 1.5 * std::max(est.value, 0.0);
        if (!(mu0 > 0.0)) {
            throw NonFiniteError(fmt::format("escalation: theta* estimate {} gives no start",
                                             est.value));
        }
    }
    double mu = mu0;
    for (int r = 0; r < cfg.sweep.escalation.rounds; ++r) {
        report.rounds.push_back(sweep_round(cfg, bundle, mu));
        if (!report.rounds.back().intervals.empty()) {
            break;
        }
        mu *= cfg.sweep.escalation.factor;
    }
    return report;
}

namespace {

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ';';
        }
        out += fmt::format("{}", v[i]);
    }
    return out;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json row_json(const SweepRow& row) {
    json j = {{"lambda", row.lambda},
              {"count", row.count},
              {"energies", row.energies},
              {"norms", row.norms},
              {"max_residual", number(row.max_residual)}};
    if (!row.error.empty()) {
        j["error"] = row.error;
    }
    if (!row.set.warnings().empty()) {
        j["warnings"] = row.set.warnings();
    }
    return j;
}

const char* const kCaveat =
    "No interval detected. The existence of such an interval is guaranteed for every mu above "
    "theta*, but nothing bounds its size, so a miss at this lambda resolution is inconclusive.";

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

void write_rows_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "lambda,count,energies,norms,max_residual\n";
    for (const auto& row : rows) {
        os << fmt::format("{},{},{},{},{}\n", row.lambda, row.count, join(row.energies),
                          join(row.norms), row.max_residual);
    }
}

json to_json(const SweepReport& report) {
    json rounds = json::array();
    for (const auto& r : report.rounds) {
        json intervals = json::array();
        for (const auto& iv : r.intervals) {
            intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}, {"rows", iv.last - iv.first + 1}});
        }
        json rows = json::array();
        for (const auto& row : r.rows) {
            rows.push_back(row_json(row));
        }
        rounds.push_back({{"mu", r.mu},
                          {"detected_intervals", std::move(intervals)},
                          {"empirical_rho", r.empirical_rho},
                          {"rows", std::move(rows)}});
    }
    json j = {{"detected", report.detected()},
              {"theta_star_estimate",
               report.theta_star_estimate ? number(*report.theta_star_estimate) : json(nullptr)},
              {"rounds", std::move(rounds)}};
    if (!report.detected()) {
        j["caveat"] = kCaveat;
    }
    return j;
}

void write_sweep(const SweepReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    if (report.rounds.empty()) {
        return;
    }
    const SweepRound& last = report.rounds.back();
    std::ostringstream rows;
    write_rows_csv(rows, last.rows);
    write_text(dir / "sweep_rows.csv", rows.str());
    write_text(dir / "sweep_summary.json", dump(to_json(report)));

    json solutions = json::array();
    for (const auto& row : last.rows) {
        solutions.push_back({{"lambda", row.lambda}, {"mu", last.mu}, {"set", io::to_json(row.set)}});
    }
    write_text(dir / "sweep_solutions.json", dump(solutions));
}

double reverify_sweep(const RunConfig& cfg, const std::filesystem::path& dir) {
    std::ifstream in(dir / "sweep_solutions.json");
    if (!in) {
        throw ConfigError(fmt::format("cannot open '{}'", (dir / "sweep_solutions.json").string()));
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("sweep_solutions.json: {}", e.what()));
    }
    const auto bundle = make_bundle(cfg.bundle);
    double worst = 0.0;
    for (const auto& entry : doc) {
        const ProblemSpec spec(bundle, Grid1D(cfg.n), entry.at("mu").get<double>(),
                               entry.at("lambda").get<double>());
        worst = std::max(worst, io::reverify_residuals(spec, entry.at("set")));
    }
    return worst;
}

std::vector<CheckRow> gradcheck_suite(std::shared_ptr<const NonlinearityBundle> bundle,
                                      const Grid1D& grid, const GradcheckConfig& cfg,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto [lam_lo, lam_hi] = ProblemSpec::lambda_range(*bundle);
    const double lam_mid = 0.5 * (lam_lo + lam_hi);
    const double lam_half = 0.25 * (lam_hi - lam_lo);

    auto random_field = [&](double radius) {
        std::vector<double> c(grid.n_interior());
        for (auto& x : c) {
            x = normal(rng);
        }
        Field u(grid, std::move(c));
        const double norm = std::sqrt(norm_sq(u));
        if (norm > 0.0) {
            u *= radius / norm;
        }
        return u;
    };

    std::vector<CheckRow> rows;
    for (std::size_t d = 0; d < cfg.draws; ++d) {
        const double lambda = lam_mid + lam_half * (2.0 * unit(rng) - 1.0);
        const double mu = cfg.mu_max * unit(rng);
        const Field u = random_field(0.2 + 1.8 * unit(rng));
        const Field v = random_field(1.0);
        const ProblemSpec spec(bundle, grid, mu, lambda);

        const auto gc = gradient_check(spec, u, v, cfg.step, cfg.residual_scale);
        rows.push_back({fmt::format("gradient[{}]", d), gc.rel_error, cfg.tolerance});

        if (bundle->smooth()) {
            const auto ha = hessian_action(spec, u, v, HessianMode::Analytic);
            const auto hf = hessian_action(spec, u, v, HessianMode::FiniteDifference);
            double diff = 0.0;
            for (std::size_t i = 0; i < ha.size(); ++i) {
                diff = std::max(diff, std::abs(ha[i] - hf[i]));
            }
            rows.push_back(
                {fmt::format("hessian[{}]", d), diff / (1.0 + max_abs(ha)), cfg.tolerance});
        }
    }

    // mu = 0: the energy is 1/2 K(|u|^2) - int G(u). With affine k and no g it
    // is a quartic along every line and the five-point stencil is exact.
    const bool quartic = bundle->k().kind() == FnKind::AffineK && !bundle->g();
    const std::size_t quad_draws = std::max<std::size_t>(1, cfg.draws / 4);
    for (std::size_t d = 0; d < quad_draws; ++d) {
        const ProblemSpec spec(bundle, grid, 0.0, lam_mid);
        const Field u = random_field(0.2 + 1.8 * unit(rng));
        const Field v = random_field(1.0);
        if (quartic) {
            const auto gc = gradient_check_five_point(spec, u, v, 1e-2, cfg.residual_scale);
            rows.push_back({fmt::format("mu0[{}]", d), gc.rel_error, cfg.quadratic_tolerance});
        } else {
            const auto gc = gradient_check(spec, u, v, cfg.step, cfg.residual_scale);
            rows.push_back({fmt::format("mu0[{}]", d), gc.rel_error, cfg.tolerance});
        }
    }
    return rows;
}

namespace {

double nodal_distance(const Field& a, const Field& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

}  // namespace

OracleMatch run_oracle(const RunConfig& cfg) {
    if (cfg.n > 3) {
        throw ConfigError(fmt::format("oracle: grid.n = {} exceeds 3", cfg.n));
    }
    const auto bundle = make_bundle(cfg.bundle);
    const ProblemSpec spec(bundle, Grid1D(cfg.n), cfg.solve.mu, cfg.solve.lambda);
    OracleMatch m;
    m.found = find_all(spec, cfg.solver);
    m.truth = brute_force(spec, {cfg.oracle.box, cfg.oracle.resolution}, cfg.solver);

    std::vector<bool> used(m.found.size(), false);
    for (std::size_t t = 0; t < m.truth.size(); ++t) {
        std::size_t best = m.found.size();
        double best_d = cfg.oracle.match_tol;
        for (std::size_t f = 0; f < m.found.size(); ++f) {
            const double d = nodal_distance(m.truth.points()[t].u, m.found.points()[f].u);
            if (!used[f] && d <= best_d) {
                best = f;
                best_d = d;
            }
        }
        if (best == m.found.size()) {
            m.missed.push_back(t);
        } else {
            used[best] = true;
        }
    }
    for (std::size_t f = 0; f < m.found.size(); ++f) {
        if (!used[f]) {
            m.spurious.push_back(f);
        }
    }
    return m;
}

namespace {

ScalarMap make_phi(const PhiSpec& spec, std::shared_ptr<const NonlinearityBundle> bundle) {
    if (spec.kind == "abs-power") {
        const double p = spec.params.empty() ? 2.0 : spec.params[0];
        if (!(p >= 1.0)) {
            throw ConfigError("minimax.phi: abs-power needs an exponent >= 1 (convexity)");
        }
        return [p](double t) { return std::pow(std::abs(t), p); };
    }
    return [bundle](double t) { return bundle->H(t); };
}

}  // namespace

MinimaxResult run_minimax(const RunConfig& cfg) {
    const auto& mc = cfg.minimax;
    const bool external = mc.entries || mc.cloud_csv;
    std::shared_ptr<const NonlinearityBundle> bundle;
    if (!external || mc.phi.kind == "bundle-H") {
        bundle = make_bundle(cfg.bundle);
    }
    const ScalarMap phi = make_phi(mc.phi, bundle);

    MinimaxResult res;
    if (external) {
        if (mc.entries) {
            res.cloud.entries = *mc.entries;
            res.cloud.source = "synthetic";
        } else {
            std::ifstream in(*mc.cloud_csv);
            if (!in) {
                throw ConfigError(fmt::format("cannot open cloud '{}'", *mc.cloud_csv));
            }
            res.cloud = io::read_cloud_csv(in, "file");
        }
        try {
            res.cloud.validate();
        } catch (const DomainError& e) {
            throw ConfigError(fmt::format("minimax cloud: {}", e.what()));
        }
        res.theta = estimate_theta(res.cloud, phi, ThetaKind::ThetaHat);
    } else {
        const auto cloud = bundle_cloud(cfg, *bundle, mc.grid_n);
        res.cloud = cloud.cloud;
        if (mc.phi.kind == "bundle-H") {
            res.theta = estimate_theta_star(*bundle, cloud, mc.refine_iterations);
        } else {
            res.theta = estimate_theta(res.cloud, phi, ThetaKind::ThetaHat);
        }
    }
    const double mu = mc.mu.value_or(mc.mu_factor * std::max(res.theta.value, 0.0));
    res.report = prop1_check(res.cloud, phi, mu, mc.lambda_grid);
    return res;
}

ThetaResult run_theta(const RunConfig& cfg) {
    const auto bundle = make_bundle(cfg.bundle);
    const auto cloud = bundle_cloud(cfg, *bundle, cfg.minimax.grid_n);
    const ScalarMap phi = [bundle](double t) { return bundle->H(t); };
    ThetaResult res;
    res.theta_star = estimate_theta_star(*bundle, cloud, cfg.minimax.refine_iterations);
    res.theta = estimate_theta(cloud.cloud, phi, ThetaKind::Theta);
    res.theta_hat = estimate_theta(cloud.cloud, phi, ThetaKind::ThetaHat);
    return res;
}

// ---------------------------------------------------------------- commands

int cmd_sweep(const RunConfig& cfg) {
    const auto report = run_sweep(cfg);
    write_sweep(report, cfg.out_dir);
    for (const auto& r : report.rounds) {
        std::size_t max_count = 0;
        for (const auto& row : r.rows) {
            max_count = std::max(max_count, row.count);
        }
        fmt::print("mu = {:.6g}: {} rows, max count {}, {} interval(s)\n", r.mu, r.rows.size(),
                   max_count, r.intervals.size());
        for (const auto& iv : r.intervals) {
            fmt::print("  lambda in [{:.6g}, {:.6g}], empirical rho {:.6g}\n", iv.lo, iv.hi,
                       r.empirical_rho);
        }
    }
    if (!report.detected()) {
        fmt::print("{}\n", kCaveat);
        return kNotDetected;
    }
    return kSuccess;
}

int cmd_solve(const RunConfig& cfg) {
    const auto bundle = make_bundle(cfg.bundle);
    const ProblemSpec spec(bundle, Grid1D(cfg.n), cfg.solve.mu, cfg.solve.lambda);
    const auto set = find_all(spec, cfg.solver);
    std::filesystem::create_directories(cfg.out_dir);
    json summary = io::to_json(set);
    summary["lambda"] = cfg.solve.lambda;
    summary["mu"] = cfg.solve.mu;
    write_text(cfg.out_dir / "solve_solutions.json", dump(summary));
    std::ostringstream points;
    io::write_points_csv(points, set);
    write_text(cfg.out_dir / "solve_points.csv", points.str());
    for (std::size_t i = 0; i < set.size(); ++i) {
        std::ostringstream field;
        io::write_field_csv(field, set.points()[i].u);
        write_text(cfg.out_dir / fmt::format("solve_u{}.csv", i), field.str());
    }
    fmt::print("lambda = {:.6g}, mu = {:.6g}: {} critical point(s)\n", cfg.solve.lambda,
               cfg.solve.mu, set.size());
    for (const auto& p : set.points()) {
        fmt::print("  energy {:+.10e}  norm {:.6e}  residual {:.2e}\n", p.energy, p.norm,
                   p.residual_norm);
    }
    return kSuccess;
}

int cmd_gradcheck(const RunConfig& cfg) {
    const auto bundle = make_bundle(cfg.bundle);
    const auto rows = gradcheck_suite(bundle, Grid1D(cfg.n), cfg.gradcheck, cfg.seed);
    bool ok = true;
    json table = json::array();
    fmt::print("{:<14} {:>12} {:>10}  result\n", "check", "rel_error", "threshold");
    for (const auto& r : rows) {
        ok = ok && r.pass();
        fmt::print("{:<14} {:>12.3e} {:>10.1e}  {}\n", r.name, r.value, r.threshold,
                   r.pass() ? "pass" : "FAIL");
        table.push_back(
            {{"check", r.name}, {"value", r.value}, {"threshold", r.threshold}, {"pass", r.pass()}});
    }
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "gradcheck.json", dump({{"pass", ok}, {"checks", table}}));
    return ok ? kSuccess : kNotDetected;
}

int cmd_oracle(const RunConfig& cfg) {
    const auto m = run_oracle(cfg);
    fmt::print("find_all: {} point(s), brute force: {} point(s)\n", m.found.size(),
               m.truth.size());
    for (std::size_t t = 0; t < m.truth.size(); ++t) {
        const bool missed = std::find(m.missed.begin(), m.missed.end(), t) != m.missed.end();
        fmt::print("  truth {} energy {:+.8e} norm {:.6e}: {}\n", t, m.truth.points()[t].energy,
                   m.truth.points()[t].norm, missed ? "MISSED" : "matched");
    }
    for (const auto f : m.spurious) {
        fmt::print("  found {} energy {:+.8e}: no brute-force partner\n", f,
                   m.found.points()[f].energy);
    }
    for (const auto& w : m.truth.warnings()) {
        fmt::print("  warning: {}\n", w);
    }
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "oracle.json",
               dump({{"match", m.match()},
                     {"found", io::to_json(m.found)},
                     {"truth", io::to_json(m.truth)},
                     {"missed", m.missed},
                     {"spurious", m.spurious}}));
    return m.match() ? kSuccess : kNotDetected;
}

int cmd_minimax(const RunConfig& cfg) {
    const auto res = run_minimax(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "minimax_report.json", dump(io::to_json(res.report)));
    write_text(cfg.out_dir / "theta.json", dump(io::to_json(res.theta)));
    std::ostringstream cloud;
    io::write_cloud_csv(cloud, res.cloud);
    write_text(cfg.out_dir / "cloud.csv", cloud.str());
    fmt::print("{} = {:.10g} (witness gamma {:.6g}, j {:.6g})\n", to_string(res.theta.kind),
               res.theta.value, res.theta.witness.gamma, res.theta.witness.j);
    for (const auto& w : res.theta.warnings) {
        fmt::print("  warning: {}\n", w);
    }
    fmt::print("mu = {:.10g}: lhs = {:.10g} at lambda = {:.10g}, rhs = {:.10g}, gap = {:.10g}\n",
               res.report.mu, res.report.lhs, res.report.lhs_lambda, res.report.rhs,
               res.report.gap);
    fmt::print("gap {}\n", res.report.certified ? "certified" : "not certified");
    return res.report.certified ? kSuccess : kNotDetected;
}

int cmd_theta(const RunConfig& cfg) {
    const auto res = run_theta(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "theta.json", dump({{"theta_star", io::to_json(res.theta_star)},
                                                 {"theta", io::to_json(res.theta)},
                                                 {"theta_hat", io::to_json(res.theta_hat)}}));
    for (const auto* est : {&res.theta_star, &res.theta, &res.theta_hat}) {
        fmt::print("{:<10} = {:.10g}{}\n", to_string(est->kind), est->value,
                   est->refined ? " (refined)" : "");
        for (const auto& w : est->warnings) {
            fmt::print("  warning: {}\n", w);
        }
    }
    return kSuccess;
}

}  // namespace kirchhoff::cli
