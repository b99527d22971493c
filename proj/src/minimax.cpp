#include "kirchhoff/minimax.hpp"

#include "kirchhoff/energy.hpp"
#include "kirchhoff/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace kirchhoff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kShrink = 1e-9;

// Runs body(i) for i in [0, n) in parallel and rethrows the first captured exception.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace

void SampleCloud::validate() const {
    bool has_base = false;
    for (const auto& e : entries) {
        if (!std::isfinite(e.gamma) || !std::isfinite(e.j)) {
            throw DomainError(fmt::format("SampleCloud: non-finite entry ({}, {})", e.gamma, e.j));
        }
        if (e.gamma == 0.0 && e.j == 0.0) {
            has_base = true;
        }
    }
    if (!has_base) {
        throw DomainError("SampleCloud: the base entry (0, 0) is missing");
    }
}

double SampleCloud::j_min() const {
    double m = kInf;
    for (const auto& e : entries) {
        m = std::min(m, e.j);
    }
    return m;
}

double SampleCloud::j_max() const {
    double m = -kInf;
    for (const auto& e : entries) {
        m = std::max(m, e.j);
    }
    return m;
}

CloudEntry cloud_entry(const NonlinearityBundle& bundle, const Field& u) {
    const double q = norm_sq(u);
    double gamma = 0.5 * bundle.primitive(Primitive::K, q);
    if (bundle.g()) {
        gamma -= integrate_composed([&bundle](double xi) { return bundle.G(xi); }, u);
    }
    return {gamma, jf(bundle, u)};
}

BundleCloud make_bundle_cloud(const NonlinearityBundle& bundle, const Grid1D& grid,
                              const CloudOptions& opts) {
    if (opts.samples == 0) {
        throw DomainError("make_bundle_cloud: samples must be positive");
    }
    if (opts.radii.empty()) {
        throw DomainError("make_bundle_cloud: the radius ladder is empty");
    }
    for (const double r : opts.radii) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw DomainError(fmt::format("make_bundle_cloud: radius {} is not positive", r));
        }
    }

    const std::size_t n = grid.n_interior();
    const std::size_t modes = std::min<std::size_t>(n, 8);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.5, 1.0);

    BundleCloud out;
    out.cloud.source = "bundle";
    out.fields.reserve(opts.samples);
    out.fields.emplace_back(grid);
    for (std::size_t s = 1; s < opts.samples; ++s) {
        std::vector<double> amp(modes);
        for (std::size_t m = 0; m < modes; ++m) {
            amp[m] = normal(rng) / static_cast<double>((m + 1) * (m + 1));
        }
        const double radius = opts.radii[(s - 1) % opts.radii.size()] * unit(rng);
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.node(i + 1);
            for (std::size_t m = 0; m < modes; ++m) {
                c[i] += amp[m] * std::sin(static_cast<double>(m + 1) * std::numbers::pi * x);
            }
        }
        Field u(grid, std::move(c));
        const double norm = std::sqrt(norm_sq(u));
        if (norm > 0.0) {
            u *= radius / norm;
        }
        out.fields.push_back(std::move(u));
    }

    out.cloud.entries.resize(out.fields.size());
    parallel_for(out.fields.size(), [&](std::size_t i) {
        out.cloud.entries[i] = cloud_entry(bundle, out.fields[i]);
    });
    out.cloud.entries[0] = {0.0, 0.0};
    return out;
}

std::string_view to_string(ThetaKind kind) {
    switch (kind) {
        case ThetaKind::Theta:
            return "theta";
        case ThetaKind::ThetaStar:
            return "theta_star";
        case ThetaKind::ThetaHat:
            return "theta_hat";
    }
    return "unknown";
}

ThetaEstimate estimate_theta(const SampleCloud& cloud, const ScalarMap& phi, ThetaKind kind) {
    cloud.validate();
    const double lo = cloud.j_min();
    const double hi = cloud.j_max();

    ThetaEstimate est;
    est.kind = kind;
    est.value = kInf;
    std::set<double> interior_values;
    bool found = false;
    for (std::size_t i = 0; i < cloud.entries.size(); ++i) {
        const auto& e = cloud.entries[i];
        if (e.j == 0.0) {
            continue;
        }
        if (kind == ThetaKind::Theta && !(e.j > lo && e.j < hi)) {
            continue;
        }
        interior_values.insert(e.j);
        const double ratio = e.gamma / phi(e.j);
        if (!found || ratio < est.value) {
            est.value = ratio;
            est.witness = e;
            est.witness_index = i;
            found = true;
        }
    }
    if (!found) {
        throw EmptyAdmissible(
            fmt::format("estimate_theta: no admissible entry for {}", to_string(kind)));
    }
    if (kind == ThetaKind::Theta && interior_values.size() < 2) {
        est.warnings.push_back(fmt::format(
            "fewer than 2 distinct nonzero j values strictly inside ({}, {})", lo, hi));
    }
    if (est.value < 0.0) {
        est.negative = true;
        est.warnings.push_back(fmt::format("NegativeTheta: estimate {} is below 0", est.value));
    }
    return est;
}

namespace {

// Nelder-Mead minimization of f from x0; returns the best vertex and its value.
std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x0,
    double scale, int iterations) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += scale;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = f(simplex[i]);
    }

    auto blend = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = a[k] + t * (b[k] - a[k]);
        }
        return out;
    };

    std::vector<std::size_t> order(n + 1);
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i <= n; ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                centroid[k] += simplex[i][k] / static_cast<double>(n);
            }
        }

        const auto reflected = blend(centroid, simplex[worst], -1.0);
        const double fr = f(reflected);
        if (fr < values[best]) {
            const auto expanded = blend(centroid, simplex[worst], -2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const auto contracted =
            outside ? blend(centroid, reflected, 0.5) : blend(centroid, simplex[worst], 0.5);
        const double fc = f(contracted);
        if (fc < std::min(fr, values[worst])) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            simplex[i] = blend(simplex[best], simplex[i], 0.5);
            values[i] = f(simplex[i]);
        }
    }
    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    return {simplex[idx], *it};
}

}  // namespace

ThetaEstimate estimate_theta_star(const NonlinearityBundle& bundle, const BundleCloud& cloud,
                                  int refine_iterations) {
    if (cloud.fields.size() != cloud.cloud.entries.size()) {
        throw DomainError("estimate_theta_star: fields and entries differ in length");
    }
    const ScalarMap h_primitive = [&bundle](double t) { return bundle.H(t); };
    ThetaEstimate est = estimate_theta(cloud.cloud, h_primitive, ThetaKind::ThetaHat);
    est.kind = ThetaKind::ThetaStar;
    if (refine_iterations <= 0) {
        return est;
    }

    const Field& start = cloud.fields[est.witness_index];
    const Grid1D grid = start.grid();
    auto ratio = [&](const std::vector<double>& c) {
        const Field u(grid, c);
        CloudEntry e;
        try {
            e = cloud_entry(bundle, u);
        } catch (const DomainError&) {
            return kInf;
        }
        if (e.j == 0.0) {
            return kInf;
        }
        const double r = e.gamma / bundle.primitive(Primitive::H, e.j);
        return std::isfinite(r) ? r : kInf;
    };
    const double scale = 0.05 * std::max(max_abs(start.coeffs()), 1e-12);
    auto [best, value] = nelder_mead(ratio, std::vector<double>(start.coeffs().begin(), start.coeffs().end()), scale, refine_iterations);
    if (value < est.value) {
        est.value = value;
        est.witness = cloud_entry(bundle, Field(grid, best));
        est.refined = true;
        est.negative = value < 0.0;
    }
    return est;
}

namespace {

// inf over entries of gamma - mu phi(j - lambda).
struct InnerInf {
    double value = kInf;
    std::size_t index = 0;
};

InnerInf inner_inf(const SampleCloud& cloud, const ScalarMap& phi, double mu, double lambda) {
    InnerInf best;
    for (std::size_t i = 0; i < cloud.entries.size(); ++i) {
        const auto& e = cloud.entries[i];
        const double v = e.gamma - mu * phi(e.j - lambda);
        if (v < best.value) {
            best.value = v;
            best.index = i;
        }
    }
    return best;
}

}  // namespace

MinimaxReport prop1_check(const SampleCloud& cloud, const ScalarMap& phi, double mu,
                          std::size_t lambda_grid_size) {
    cloud.validate();
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw DomainError(fmt::format("prop1_check: mu = {} must be non-negative", mu));
    }
    if (lambda_grid_size < 2) {
        throw DomainError("prop1_check: the lambda grid needs at least 2 points");
    }
    const double jlo = cloud.j_min();
    const double jhi = cloud.j_max();
    if (!(jlo < jhi)) {
        throw DegenerateInterval(fmt::format("prop1_check: min j = max j = {}", jlo));
    }

    MinimaxReport rep;
    rep.mu = mu;
    const double margin = kShrink * (jhi - jlo);
    rep.lambda_lo = jlo + margin;
    rep.lambda_hi = jhi - margin;
    rep.lambda_count = lambda_grid_size;
    const double step = (rep.lambda_hi - rep.lambda_lo) / static_cast<double>(lambda_grid_size - 1);

    std::vector<double> lambdas(lambda_grid_size);
    for (std::size_t i = 0; i < lambda_grid_size; ++i) {
        lambdas[i] = rep.lambda_lo + static_cast<double>(i) * step;
    }
    lambdas.back() = rep.lambda_hi;

    std::vector<InnerInf> inner(lambda_grid_size);
    parallel_for(lambda_grid_size,
                 [&](std::size_t i) { inner[i] = inner_inf(cloud, phi, mu, lambdas[i]); });

    std::size_t best = 0;
    for (std::size_t i = 1; i < lambda_grid_size; ++i) {
        if (inner[i].value > inner[best].value) {
            best = i;
        }
    }
    rep.lhs = inner[best].value;
    rep.lhs_lambda = lambdas[best];
    rep.lhs_entry = inner[best].index;

    // Golden-section polish between the neighbours of the best grid point.
    std::vector<double> evaluated = lambdas;
    {
        double a = lambdas[best > 0 ? best - 1 : 0];
        double b = lambdas[std::min(best + 1, lambda_grid_size - 1)];
        const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - ratio * (b - a);
        double d = a + ratio * (b - a);
        InnerInf fc = inner_inf(cloud, phi, mu, c);
        InnerInf fd = inner_inf(cloud, phi, mu, d);
        evaluated.push_back(c);
        evaluated.push_back(d);
        for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
            if (fc.value > fd.value) {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = inner_inf(cloud, phi, mu, c);
                evaluated.push_back(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = inner_inf(cloud, phi, mu, d);
                evaluated.push_back(d);
            }
            for (const auto& [lam, val] : {std::pair{c, fc}, std::pair{d, fd}}) {
                if (val.value > rep.lhs) {
                    rep.lhs = val.value;
                    rep.lhs_lambda = lam;
                    rep.lhs_entry = val.index;
                }
            }
        }
    }

    // rhs: for each entry the supremum over lambda includes the closure point
    // lambda = j, where phi vanishes.
    std::vector<double> sup_per_entry(cloud.entries.size());
    parallel_for(cloud.entries.size(), [&](std::size_t i) {
        const auto& e = cloud.entries[i];
        double s = e.gamma - mu * phi(0.0);
        for (const double lam : lambdas) {
            s = std::max(s, e.gamma - mu * phi(e.j - lam));
        }
        sup_per_entry[i] = s;
    });
    rep.rhs = *std::min_element(sup_per_entry.begin(), sup_per_entry.end());
    rep.gap = rep.rhs - rep.lhs;
    rep.certified = rep.lhs < -MinimaxReport::kGapTol;

    // Certificate: x1 minimizes gamma - mu phi(j) over j != 0.
    GapCertificate& cert = rep.certificate;
    double v1 = kInf;
    for (std::size_t i = 0; i < cloud.entries.size(); ++i) {
        const auto& e = cloud.entries[i];
        if (e.j == 0.0) {
            continue;
        }
        const double v = e.gamma - mu * phi(e.j);
        if (v < v1) {
            v1 = v;
            cert.witness_index = i;
        }
    }
    if (v1 < 0.0) {
        const CloudEntry x1 = cloud.entries[cert.witness_index];
        cert.epsilon = -0.5 * v1;
        auto holds = [&](double delta) {
            constexpr int kChecks = 64;
            for (int k = 0; k <= kChecks; ++k) {
                const double lam = -delta + 2.0 * delta * k / kChecks;
                try {
                    if (!(x1.gamma - mu * phi(x1.j - lam) < -cert.epsilon)) {
                        return false;
                    }
                } catch (const DomainError&) {
                    return false;
                }
            }
            return true;
        };
        double good = 0.0;
        double bad = std::abs(x1.j);
        if (bad > 0.0 && holds(bad)) {
            good = bad;
        } else {
            for (int it = 0; it < 200 && bad - good > 1e-15 * bad; ++it) {
                const double mid = 0.5 * (good + bad);
                (holds(mid) ? good : bad) = mid;
            }
        }
        if (good > 0.0) {
            cert.delta = good;
            cert.nu = kInf;
            for (const double lam : evaluated) {
                if (std::abs(lam) > cert.delta) {
                    cert.nu = std::min(cert.nu, phi(-lam));
                }
            }
            cert.bound = std::max(-cert.epsilon, -mu * cert.nu);
            cert.available = cert.nu > 0.0;
        }
    }
    return rep;
}

Thm3Condition thm3_condition(std::span<const double> psi, std::span<const double> j, double mu) {
    if (psi.size() != j.size()) {
        throw DomainError("thm3_condition: psi and J samples differ in length");
    }
    Thm3Condition out;
    out.left_inf = kInf;
    out.right_inf = kInf;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double left = psi[i] - mu * std::expm1(j[i]);
        const double right = psi[i] - mu * j[i];
        if (left < out.left_inf) {
            out.left_inf = left;
            out.left_index = i;
        }
        if (right < out.right_inf) {
            out.right_inf = right;
            out.right_index = i;
        }
    }
    // Samples such as 1 - cos x carry absolute rounding on the scale of the
    // data, so a zero infimum can come out slightly negative.
    double scale = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        scale = std::max(scale, std::abs(psi[i]) + mu * std::abs(j[i]));
    }
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * scale;
    out.holds = !psi.empty() && out.left_inf < 0.0 && out.right_inf >= -slack;
    return out;
}

OpenInterval thm3_interval_map(double mu, OpenInterval b) {
    // nu -> mu e^{-nu} is decreasing, so the ends swap.
    const double lo = std::min(b.lo, b.hi);
    const double hi = std::max(b.lo, b.hi);
    if (!(lo < hi)) {
        const double v = mu * std::exp(-lo);
        return {v, v};
    }
    return {mu * std::exp(-hi), mu * std::exp(-lo)};
}

double thm3_residual_identity(double j, std::span<const double> jprime, double mu, double nu) {
    const double a = mu * std::expm1(j - nu);
    const double b = mu * std::exp(-nu) * std::exp(j);
    double worst = 0.0;
    for (const double jp : jprime) {
        const double lhs = a * jp + mu * jp;
        const double rhs = b * jp;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

}  // namespace kirchhoff
