#include "kirchhoff/quadrature.hpp"

#include "kirchhoff/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace kirchhoff {

QuadratureRule QuadratureRule::gauss_legendre(std::size_t n) {
    if (n == 0) {
        throw DomainError("gauss_legendre: need at least one point");
    }
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                const auto jd = static_cast<double>(j);
                p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        // Map from [-1, 1] to [0, 1]; store in ascending order.
        rule.points[i] = 0.5 * (1.0 - z);
        rule.points[n - 1 - i] = 0.5 * (1.0 + z);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    if (n % 2 == 1) {
        rule.points[n / 2] = 0.5;
    }
    return rule;
}

namespace {

const QuadratureRule& panel_rule() {
    static const QuadratureRule rule = QuadratureRule::gauss_legendre(15);
    return rule;
}

struct PanelValue {
    double value;
    double magnitude;  // integral of |f|, sets the rounding floor
};

PanelValue panel(const std::function<double(double)>& f, double a, double b) {
    const auto& rule = panel_rule();
    const double len = b - a;
    double sum = 0.0;
    double mag = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double term = rule.weights[q] * f(a + len * rule.points[q]);
        sum += term;
        mag += std::abs(term);
    }
    return {len * sum, len * mag};
}

double refine(const std::function<double(double)>& f, double a, double b, double whole,
              double tol, int depth, int max_depth) {
    const double mid = 0.5 * (a + b);
    const PanelValue left = panel(f, a, mid);
    const PanelValue right = panel(f, mid, b);
    const double both = left.value + right.value;
    if (!std::isfinite(both)) {
        throw QuadratureError("integrate_adaptive: non-finite integrand on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]");
    }
    const double floor =
        64.0 * std::numeric_limits<double>::epsilon() * (left.magnitude + right.magnitude);
    if (std::abs(both - whole) <= std::max(tol, floor)) {
        return both;
    }
    if (depth >= max_depth) {
        throw QuadratureError("integrate_adaptive: tolerance not reached within depth " +
                              std::to_string(max_depth));
    }
    return refine(f, a, mid, left.value, 0.5 * tol, depth + 1, max_depth) +
           refine(f, mid, b, right.value, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opts) {
    if (a == b) {
        return 0.0;
    }
    if (b < a) {
        return -integrate_adaptive(f, b, a, opts);
    }
    return refine(f, a, b, panel(f, a, b).value, opts.abs_tol, 0, opts.max_depth);
}

}  // namespace kirchhoff
