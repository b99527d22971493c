#include "kirchhoff/energy.hpp"

#include "kirchhoff/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace kirchhoff {

ProblemSpec::ProblemSpec(std::shared_ptr<const NonlinearityBundle> bundle, Grid1D grid, double mu,
                         double lambda)
    : bundle_(std::move(bundle)), grid_(grid), mu_(mu), lambda_(lambda) {
    if (!bundle_) {
        throw DomainError("ProblemSpec: missing bundle");
    }
    if (!(mu_ >= 0.0) || !std::isfinite(mu_)) {
        throw DomainError(fmt::format("ProblemSpec: mu = {} must be finite and >= 0", mu_));
    }
    const auto [lo, hi] = lambda_range(*bundle_);
    if (!(lambda_ >= lo && lambda_ <= hi)) {
        throw DomainError(fmt::format("ProblemSpec: lambda = {} outside ({}, {})", lambda_,
                                      bundle_->alpha_f(), bundle_->beta_f()));
    }
}

std::pair<double, double> ProblemSpec::lambda_range(const NonlinearityBundle& bundle) {
    const double margin = kLambdaMargin * bundle.omega_f();
    return {bundle.alpha_f() + margin, bundle.beta_f() - margin};
}

ProblemSpec ProblemSpec::with_lambda(double lambda) const {
    return {bundle_, grid_, mu_, lambda};
}

ProblemSpec ProblemSpec::with_mu(double mu) const { return {bundle_, grid_, mu, lambda_}; }

ProblemSpec ProblemSpec::with_grid(Grid1D grid) const { return {bundle_, grid, mu_, lambda_}; }

namespace {

void require_grid(const ProblemSpec& spec, const Field& u) {
    if (!(spec.grid() == u.grid())) {
        throw DomainError("field does not live on the problem grid");
    }
}

}  // namespace

double jf(const NonlinearityBundle& bundle, const Field& u) {
    return integrate_composed([&bundle](double xi) { return bundle.F(xi); }, u);
}

EnergyBreakdown energy(const ProblemSpec& spec, const Field& u) {
    require_grid(spec, u);
    const auto& b = spec.bundle();
    EnergyBreakdown e;
    e.kirchhoff = 0.5 * b.K(norm_sq(u));
    if (b.g()) {
        e.g_part = integrate_composed([&b](double xi) { return b.G(xi); }, u);
    }
    e.jf = jf(b, u);
    e.h_part = spec.mu() == 0.0 ? 0.0 : spec.mu() * b.H(e.jf - spec.lambda());
    e.total = e.kirchhoff - e.g_part - e.h_part;
    return e;
}

std::vector<double> residual(const ProblemSpec& spec, const Field& u) {
    require_grid(spec, u);
    const auto& b = spec.bundle();
    const double kq = b.k()(norm_sq(u));
    std::vector<double> r = stiffness_apply(u);
    for (double& v : r) {
        v *= kq;
    }
    if (spec.mu() != 0.0) {
        const double coeff = spec.mu() * b.h_value(jf(b, u) - spec.lambda());
        const auto bf = load_vector([&b](double xi) { return b.f()(xi); }, u);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] -= coeff * bf[i];
        }
    }
    if (b.g()) {
        const auto bg = load_vector([&b](double xi) { return b.g_value(xi); }, u);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] -= bg[i];
        }
    }
    return r;
}

HessianOperator::HessianOperator(const ProblemSpec& spec, const Field& u, HessianMode mode)
    : spec_(spec), u_(u), analytic_(false) {
    require_grid(spec, u);
    const auto& b = spec.bundle();
    if (mode == HessianMode::Analytic && !b.smooth()) {
        throw SmoothnessError("analytic Hessian requested for a bundle with C0 entries");
    }
    analytic_ = mode == HessianMode::Analytic || (mode == HessianMode::Auto && b.smooth());
    if (!analytic_) {
        fd_step_ = 1e-6 * (1.0 + std::sqrt(norm_sq(u)));
        return;
    }
    const double q = norm_sq(u);
    k_ = b.k()(q);
    kprime_ = b.k().derivative(q);
    su_ = stiffness_apply(u);
    const std::size_t n = u.size();
    local_ = Tridiagonal{std::vector<double>(n, 0.0), std::vector<double>(n > 0 ? n - 1 : 0, 0.0)};
    if (spec.mu() != 0.0) {
        const double t = jf(b, u) - spec.lambda();
        h_ = b.h_value(t);
        hprime_ = b.h().derivative(t);
        bf_ = load_vector([&b](double xi) { return b.f()(xi); }, u);
        const double scale = spec.mu() * h_;
        if (scale != 0.0) {
            const Tridiagonal mf =
                weighted_mass([&b](double xi) { return b.f().derivative(xi); }, u);
            for (std::size_t i = 0; i < n; ++i) {
                local_.diag[i] += scale * mf.diag[i];
            }
            for (std::size_t i = 0; i + 1 < n; ++i) {
                local_.off[i] += scale * mf.off[i];
            }
        }
    }
    if (b.g()) {
        const Tridiagonal mg = weighted_mass([&b](double xi) { return b.g()->derivative(xi); }, u);
        for (std::size_t i = 0; i < n; ++i) {
            local_.diag[i] += mg.diag[i];
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            local_.off[i] += mg.off[i];
        }
    }
}

std::vector<double> HessianOperator::apply(std::span<const double> v) const {
    const Grid1D& grid = u_.grid();
    Field vf(grid, std::vector<double>(v.begin(), v.end()));
    if (!analytic_) {
        const double vnorm = std::sqrt(norm_sq(vf));
        if (vnorm == 0.0) {
            return std::vector<double>(v.size(), 0.0);
        }
        const double eps = fd_step_ / vnorm;
        const auto rp = residual(spec_, u_ + eps * vf);
        const auto rm = residual(spec_, u_ - eps * vf);
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = (rp[i] - rm[i]) / (2.0 * eps);
        }
        return out;
    }
    std::vector<double> out = stiffness_apply(vf);
    const double su_v = dot(su_, v);
    const double local_scale = 2.0 * kprime_ * su_v;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = k_ * out[i] + local_scale * su_[i];
    }
    if (!bf_.empty()) {
        const double nonlocal = spec_.mu() * hprime_ * dot(bf_, v);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] -= nonlocal * bf_[i];
        }
    }
    const auto mv = local_.apply(v);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= mv[i];
    }
    return out;
}

std::vector<double> HessianOperator::assemble() const {
    const std::size_t n = u_.size();
    std::vector<double> dense(n * n);
    const auto cols = static_cast<long long>(n);
#pragma omp parallel for schedule(static) if (n >= 128)
    for (long long j = 0; j < cols; ++j) {
        std::vector<double> e(n, 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        const auto col = apply(e);
        for (std::size_t i = 0; i < n; ++i) {
            dense[i * n + static_cast<std::size_t>(j)] = col[i];
        }
    }
    return dense;
}

std::vector<double> hessian_action(const ProblemSpec& spec, const Field& u, const Field& v,
                                   HessianMode mode) {
    return HessianOperator(spec, u, mode).apply(v.coeffs());
}

double t_operator_check(const NonlinearityBundle& bundle, const Field& u) {
    const double q = norm_sq(u);
    const double scale = bundle.k()(q);
    const Field v = scale * u;
    const double vnorm = std::sqrt(norm_sq(v));
    if (vnorm == 0.0) {
        return std::sqrt(q);
    }
    const Field tv = (sigma_inverse(bundle.k(), vnorm) / vnorm) * v;
    return h1_distance(tv, u);
}

namespace {

GradientCheck finish_check(const ProblemSpec& spec, const Field& u, const Field& v, double numeric,
                           double residual_scale) {
    GradientCheck c;
    c.analytic = residual_scale * dot(residual(spec, u), v.coeffs());
    c.numeric = numeric;
    c.rel_error = std::abs(c.analytic - c.numeric) / (1.0 + std::abs(c.analytic));
    return c;
}

}  // namespace

GradientCheck gradient_check(const ProblemSpec& spec, const Field& u, const Field& v, double step,
                             double residual_scale) {
    const double ep = energy(spec, u + step * v).total;
    const double em = energy(spec, u - step * v).total;
    return finish_check(spec, u, v, (ep - em) / (2.0 * step), residual_scale);
}

GradientCheck gradient_check_five_point(const ProblemSpec& spec, const Field& u, const Field& v,
                                        double step, double residual_scale) {
    const double e2p = energy(spec, u + (2.0 * step) * v).total;
    const double e1p = energy(spec, u + step * v).total;
    const double e1m = energy(spec, u - step * v).total;
    const double e2m = energy(spec, u - (2.0 * step) * v).total;
    const double numeric = (-e2p + 8.0 * e1p - 8.0 * e1m + e2m) / (12.0 * step);
    return finish_check(spec, u, v, numeric, residual_scale);
}

}  // namespace kirchhoff
