#include "kirchhoff/nonlinearity.hpp"

#include "kirchhoff/errors.hpp"
#include "kirchhoff/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace kirchhoff {

namespace {

// F on a symmetric uniform grid, accumulated outward from 0 so that each
// value costs one short quadrature when no closed form exists.
std::vector<double> scan_primitive(const ScalarFn& f, const std::vector<double>& xs,
                                   std::size_t zero_index) {
    std::vector<double> values(xs.size(), 0.0);
    const bool closed = f.has_closed_primitive();
    const auto integrand = [&f](double t) { return f(t); };
    for (std::size_t i = zero_index + 1; i < xs.size(); ++i) {
        values[i] = closed ? f.primitive(xs[i])
                           : values[i - 1] + integrate_adaptive(integrand, xs[i - 1], xs[i]);
    }
    for (std::size_t i = zero_index; i-- > 0;) {
        values[i] = closed ? f.primitive(xs[i])
                           : values[i + 1] - integrate_adaptive(integrand, xs[i], xs[i + 1]);
    }
    return values;
}

// Golden-section refinement of an extremum of F bracketed by [a, b].
double refine_extremum(const ScalarFn& f, double a, double b, bool maximize) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double sign = maximize ? -1.0 : 1.0;
    auto value = [&](double x) { return sign * f.primitive(x); };
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = value(c);
    double fd = value(d);
    for (int it = 0; it < 80 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = value(d);
        }
    }
    return sign * std::min(fc, fd);
}

}  // namespace

PrimitiveBounds bounds_of_primitive(const ScalarFn& f, const BoundsConfig& cfg) {
    if (const auto& pb = f.primitive_bounds()) {
        if (pb->sup - pb->inf <= 0.0) {
            throw DegenerateError(f.name() + ": f vanishes identically");
        }
        return {pb->inf, pb->sup, pb->sup - pb->inf, false};
    }

    const std::size_t n = cfg.scan_points | 1U;  // odd, so 0 is a node
    const std::size_t zero = n / 2;
    const double step = cfg.scan_radius / static_cast<double>(zero);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = (static_cast<double>(i) - static_cast<double>(zero)) * step;
    }
    xs[zero] = 0.0;

    double max_abs_f = 0.0;
    for (const double x : xs) {
        max_abs_f = std::max(max_abs_f, std::abs(f(x)));
    }
    if (max_abs_f == 0.0) {
        throw DegenerateError(f.name() + ": f vanishes on the whole scan");
    }

    const std::vector<double> values = scan_primitive(f, xs, zero);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    for (const double v : {*lo_it, *hi_it}) {
        if (!std::isfinite(v) || std::abs(v) > cfg.cap) {
            throw UnboundedError(fmt::format("{}: |F| reaches {} on the scan (cap {})", f.name(),
                                             v, cfg.cap));
        }
    }

    auto refine = [&](std::size_t idx, bool maximize) {
        const double a = xs[idx == 0 ? 0 : idx - 1];
        const double b = xs[std::min(idx + 1, n - 1)];
        const double best = refine_extremum(f, a, b, maximize);
        return maximize ? std::max(best, values[idx]) : std::min(best, values[idx]);
    };
    const auto lo_idx = static_cast<std::size_t>(lo_it - values.begin());
    const auto hi_idx = static_cast<std::size_t>(hi_it - values.begin());
    PrimitiveBounds out;
    out.alpha = std::min(0.0, refine(lo_idx, false));
    out.beta = std::max(0.0, refine(hi_idx, true));
    out.omega = out.beta - out.alpha;
    out.approximate = true;
    if (out.omega <= 0.0) {
        throw DegenerateError(f.name() + ": primitive is identically zero on the scan");
    }
    return out;
}

NonlinearityBundle::NonlinearityBundle(ScalarFn f, std::optional<ScalarFn> g, ScalarFn k,
                                       ScalarFn h, const BoundsConfig& cfg)
    : f_(std::move(f)), g_(std::move(g)), k_(std::move(k)), h_(std::move(h)) {
    bounds_ = bounds_of_primitive(f_, cfg);
    if (h_.is_auto_width()) {
        h_ = ScalarFn::rational_h(bounds_.omega);
    }
}

double NonlinearityBundle::primitive(Primitive which, double xi) const {
    switch (which) {
        case Primitive::F: return F(xi);
        case Primitive::G: return G(xi);
        case Primitive::K:
            if (!(xi >= 0.0)) {
                throw DomainError(fmt::format("K: argument {} is negative", xi));
            }
            return k_.primitive(xi);
        case Primitive::H:
            if (!h_domain().contains(xi)) {
                throw DomainError(fmt::format("H: argument {} outside (-{}, {})", xi,
                                              bounds_.omega, bounds_.omega));
            }
            return h_.primitive(xi);
    }
    return 0.0;
}

double NonlinearityBundle::h_value(double t) const {
    if (!h_domain().contains(t)) {
        throw DomainError(fmt::format("h: argument {} outside (-{}, {})", t, bounds_.omega,
                                      bounds_.omega));
    }
    return h_(t);
}

bool NonlinearityBundle::smooth() const {
    const auto ok = [](const ScalarFn& fn) { return fn.smoothness() != Smoothness::C0; };
    return ok(f_) && ok(k_) && ok(h_) && (!g_ || ok(*g_));
}

double eval_primitive(const NonlinearityBundle& bundle, Primitive which, double xi) {
    return bundle.primitive(which, xi);
}

AdmissibilityReport check_admissibility(const NonlinearityBundle& bundle,
                                        const AdmissibilityConfig& cfg) {
    AdmissibilityReport report;
    // Clause under test; an evaluation error inside a section fails that clause.
    std::string clause = "k(t)>0";
    auto fail = [&](std::string violated) {
        report.pass = false;
        report.violated_clause = std::move(violated);
        return report;
    };
    const std::size_t n = std::max<std::size_t>(cfg.samples, 2);
    const auto ratio = [n](std::size_t i) { return static_cast<double>(i) / static_cast<double>(n); };

    try {
        double prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i <= n; ++i) {
            clause = "k(t)>0";
            const double kv = bundle.k()(cfg.t_max * ratio(i));
            if (!(kv > 0.0)) {
                return fail(clause);
            }
            if (kv < prev) {
                return fail("k non-decreasing");
            }
            prev = kv;
        }

        const double w = bundle.omega_f();
        clause = "h\u207b\u00b9(0)={0}";
        if (std::abs(bundle.h()(0.0)) > cfg.zero_tol) {
            return fail(clause);
        }
        prev = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < n; ++i) {
            const double t = w * (2.0 * ratio(i) - 1.0);
            const double hv = bundle.h()(t);
            if (t != 0.0 && std::abs(hv) <= cfg.zero_tol) {
                return fail(clause);
            }
            if (hv < prev) {
                return fail("h non-decreasing");
            }
            prev = hv;
        }

        clause = "f non-zero";
        double max_abs_f = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = cfg.scan.scan_radius * (2.0 * ratio(i) - 1.0);
            max_abs_f = std::max(max_abs_f, std::abs(bundle.f()(x)));
            report.sup_abs_F = std::max(report.sup_abs_F, std::abs(bundle.F(x)));
            report.sup_G = std::max(report.sup_G, bundle.G(x));
        }
        if (max_abs_f == 0.0) {
            return fail(clause);
        }
    } catch (const Error&) {
        return fail(clause);
    }
    if (!(report.sup_abs_F <= cfg.scan.cap)) {
        return fail("|F| bounded");
    }
    if (!(report.sup_G <= cfg.scan.cap)) {
        return fail("G bounded above");
    }
    return report;
}

double sigma_inverse(const ScalarFn& k, double s) {
    if (!(s >= 0.0)) {
        throw DomainError(fmt::format("sigma_inverse: s = {} must be non-negative", s));
    }
    if (s == 0.0) {
        return 0.0;
    }
    const auto map = [&k](double t) { return t * k(t * t); };
    double lo = 0.0;
    double hi = 1.0;
    int expansions = 0;
    while (!(map(hi) >= s)) {
        lo = hi;
        hi *= 2.0;
        if (++expansions > 1100 || !std::isfinite(hi)) {
            throw BracketError(fmt::format("sigma_inverse: cannot bracket s = {}", s));
        }
    }
    // Bisect down to adjacent doubles, then keep the better end.
    while (true) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (map(mid) < s) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double t = std::abs(map(lo) - s) < std::abs(map(hi) - s) ? lo : hi;
    const double residual = std::abs(map(t) - s);
    if (residual > 1e-12 * (1.0 + s)) {
        // Flat or discontinuous k: the bracket collapsed without matching s.
        throw BracketError(fmt::format("sigma_inverse: residual {} at s = {}", residual, s));
    }
    return t;
}

}  // namespace kirchhoff
