#include "kirchhoff/scalar_fn.hpp"

#include "kirchhoff/errors.hpp"
#include "kirchhoff/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace kirchhoff {

std::string_view to_string(FnKind kind) {
    switch (kind) {
        case FnKind::Cosine: return "cosine";
        case FnKind::Bump: return "bump";
        case FnKind::RationalH: return "rational-h";
        case FnKind::AffineK: return "affine-k";
        case FnKind::PowerK: return "power-k";
        case FnKind::IdentityH: return "identity-h";
        case FnKind::ExpBased: return "exp-based";
        case FnKind::CustomTable: return "custom-table";
        case FnKind::Custom: return "custom";
    }
    return "unknown";
}

std::string_view to_string(Smoothness s) {
    switch (s) {
        case Smoothness::C0: return "C0";
        case Smoothness::C1: return "C1";
        case Smoothness::Analytic: return "analytic";
    }
    return "unknown";
}

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

namespace {

// Antiderivative of (1 - s^2)^2 vanishing at 0.
double bump_antiderivative(double s) {
    const double c = std::clamp(s, -1.0, 1.0);
    const double c2 = c * c;
    return c * (1.0 - c2 * (2.0 / 3.0 - c2 / 5.0));
}

}  // namespace

ScalarFn ScalarFn::cosine(double amp, double freq) {
    ScalarFn fn;
    fn.kind_ = FnKind::Cosine;
    fn.params_ = {amp, freq};
    fn.smoothness_ = Smoothness::Analytic;
    fn.monotone_ = amp == 0.0 || freq == 0.0;
    fn.known_bounds_ = Bounds{-std::abs(amp), std::abs(amp)};
    if (freq != 0.0) {
        const double r = std::abs(amp / freq);
        fn.primitive_bounds_ = Bounds{-r, r};
    }
    fn.domain_ = Interval::real_line();
    return fn;
}

ScalarFn ScalarFn::bump(double amp, double width, double center) {
    if (!(width > 0.0)) {
        throw ConfigError("bump: width must be positive");
    }
    ScalarFn fn;
    fn.kind_ = FnKind::Bump;
    fn.params_ = {amp, width, center};
    fn.smoothness_ = Smoothness::C1;
    fn.monotone_ = amp == 0.0;
    fn.known_bounds_ = Bounds{std::min(0.0, amp), std::max(0.0, amp)};
    const double base = bump_antiderivative(-center / width);
    const double lo = amp * width * (bump_antiderivative(-1.0) - base);
    const double hi = amp * width * (bump_antiderivative(1.0) - base);
    fn.primitive_bounds_ = Bounds{std::min({lo, hi, 0.0}), std::max({lo, hi, 0.0})};
    fn.domain_ = Interval::real_line();
    return fn;
}

ScalarFn ScalarFn::rational_h(double half_width) {
    ScalarFn fn;
    fn.kind_ = FnKind::RationalH;
    fn.params_ = {half_width};
    fn.smoothness_ = Smoothness::Analytic;
    fn.monotone_ = true;
    if (half_width > 0.0) {
        fn.domain_ = Interval::open(-half_width, half_width);
    } else {
        fn.params_ = {std::numeric_limits<double>::quiet_NaN()};
        fn.domain_ = Interval::open(0.0, 0.0);
    }
    return fn;
}

ScalarFn ScalarFn::affine_k(double a, double b) {
    ScalarFn fn;
    fn.kind_ = FnKind::AffineK;
    fn.params_ = {a, b};
    fn.smoothness_ = Smoothness::Analytic;
    fn.monotone_ = b >= 0.0;
    if (b == 0.0) {
        fn.known_bounds_ = Bounds{a, a};
    }
    fn.domain_ = Interval::half_line();
    return fn;
}

ScalarFn ScalarFn::power_k(double a, double b, double p) {
    if (!(p > 0.0)) {
        throw ConfigError("power-k: exponent must be positive");
    }
    ScalarFn fn;
    fn.kind_ = FnKind::PowerK;
    fn.params_ = {a, b, p};
    fn.smoothness_ = p >= 1.0 ? Smoothness::C1 : Smoothness::C0;
    fn.monotone_ = b >= 0.0;
    fn.domain_ = Interval::half_line();
    return fn;
}

ScalarFn ScalarFn::identity_h(double slope) {
    ScalarFn fn;
    fn.kind_ = FnKind::IdentityH;
    fn.params_ = {slope};
    fn.smoothness_ = Smoothness::Analytic;
    fn.monotone_ = slope >= 0.0;
    fn.domain_ = Interval::real_line();
    return fn;
}

ScalarFn ScalarFn::exp_based(double amp, double rate) {
    if (rate == 0.0) {
        throw ConfigError("exp-based: rate must be non-zero");
    }
    ScalarFn fn;
    fn.kind_ = FnKind::ExpBased;
    fn.params_ = {amp, rate};
    fn.smoothness_ = Smoothness::Analytic;
    fn.monotone_ = amp * rate >= 0.0;
    fn.domain_ = Interval::real_line();
    return fn;
}

ScalarFn ScalarFn::table(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ConfigError("custom-table: need at least two (x, y) pairs");
    }
    if (!std::is_sorted(xs.begin(), xs.end()) ||
        std::adjacent_find(xs.begin(), xs.end()) != xs.end()) {
        throw ConfigError("custom-table: x values must be strictly increasing");
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw ConfigError("custom-table: non-finite entry");
        }
    }
    ScalarFn fn;
    fn.kind_ = FnKind::CustomTable;
    fn.params_.reserve(2 * xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        fn.params_.push_back(xs[i]);
        fn.params_.push_back(ys[i]);
    }
    fn.smoothness_ = Smoothness::C0;
    fn.monotone_ = std::is_sorted(ys.begin(), ys.end());
    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    fn.known_bounds_ = Bounds{*lo, *hi};
    fn.domain_ = Interval::real_line();
    fn.table_x_ = std::move(xs);
    fn.table_y_ = std::move(ys);
    return fn;
}

ScalarFn ScalarFn::custom(std::string name, ScalarMap value, CustomTraits traits) {
    ScalarFn fn;
    fn.kind_ = FnKind::Custom;
    fn.custom_name_ = std::move(name);
    fn.custom_value_ = std::move(value);
    fn.custom_derivative_ = std::move(traits.derivative);
    fn.custom_primitive_ = std::move(traits.primitive);
    fn.smoothness_ = traits.smoothness;
    fn.monotone_ = traits.monotone_nondecreasing;
    fn.known_bounds_ = traits.known_bounds;
    fn.primitive_bounds_ = traits.primitive_bounds;
    fn.domain_ = traits.domain;
    return fn;
}

ScalarFn ScalarFn::from_kind(std::string_view kind, std::span<const double> params) {
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (params.size() < lo || params.size() > hi) {
            throw ConfigError(fmt::format("{}: expected {} to {} parameters, got {}", kind, lo,
                                          hi, params.size()));
        }
    };
    auto at = [&](std::size_t i, double fallback) {
        return i < params.size() ? params[i] : fallback;
    };
    if (kind == "cosine") {
        need(0, 2);
        return cosine(at(0, 1.0), at(1, 1.0));
    }
    if (kind == "bump") {
        need(0, 3);
        return bump(at(0, 1.0), at(1, 1.0), at(2, 0.0));
    }
    if (kind == "rational-h") {
        need(0, 1);
        return rational_h(at(0, 0.0));
    }
    if (kind == "affine-k") {
        need(0, 2);
        return affine_k(at(0, 1.0), at(1, 0.0));
    }
    if (kind == "power-k") {
        need(3, 3);
        return power_k(params[0], params[1], params[2]);
    }
    if (kind == "identity-h") {
        need(0, 1);
        return identity_h(at(0, 1.0));
    }
    if (kind == "exp-based") {
        need(0, 2);
        return exp_based(at(0, 1.0), at(1, 1.0));
    }
    if (kind == "custom-table") {
        if (params.size() % 2 != 0) {
            throw ConfigError("custom-table: parameters are flattened (x, y) pairs");
        }
        std::vector<double> xs;
        std::vector<double> ys;
        for (std::size_t i = 0; i < params.size(); i += 2) {
            xs.push_back(params[i]);
            ys.push_back(params[i + 1]);
        }
        return table(std::move(xs), std::move(ys));
    }
    throw ConfigError(fmt::format("unknown function kind '{}'", kind));
}

std::string ScalarFn::name() const {
    if (kind_ == FnKind::Custom) {
        return custom_name_;
    }
    return std::string(to_string(kind_));
}

bool ScalarFn::is_auto_width() const {
    return kind_ == FnKind::RationalH && !(params_[0] > 0.0);
}

void ScalarFn::check_domain(double x) const {
    if (!domain_.contains(x)) {
        throw DomainError(fmt::format("{}: argument {} outside its domain", name(), x));
    }
}

double ScalarFn::eval_unchecked(double x) const {
    switch (kind_) {
        case FnKind::Cosine: return params_[0] * std::cos(params_[1] * x);
        case FnKind::Bump: {
            const double s = (x - params_[2]) / params_[1];
            if (std::abs(s) >= 1.0) {
                return 0.0;
            }
            const double q = 1.0 - s * s;
            return params_[0] * q * q;
        }
        case FnKind::RationalH: {
            const double w = params_[0];
            return x / ((w - x) * (w + x));
        }
        case FnKind::AffineK: return params_[0] + params_[1] * x;
        case FnKind::PowerK: return params_[0] + params_[1] * std::pow(x, params_[2]);
        case FnKind::IdentityH: return params_[0] * x;
        case FnKind::ExpBased: return params_[0] * std::expm1(params_[1] * x);
        case FnKind::CustomTable: {
            if (x <= table_x_.front()) {
                return table_y_.front();
            }
            if (x >= table_x_.back()) {
                return table_y_.back();
            }
            const auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
            const auto i = static_cast<std::size_t>(it - table_x_.begin());
            const double t = (x - table_x_[i - 1]) / (table_x_[i] - table_x_[i - 1]);
            return table_y_[i - 1] + t * (table_y_[i] - table_y_[i - 1]);
        }
        case FnKind::Custom: return custom_value_(x);
    }
    return 0.0;
}

double ScalarFn::operator()(double x) const {
    check_domain(x);
    return eval_unchecked(x);
}

double ScalarFn::derivative(double x) const {
    if (smoothness_ == Smoothness::C0) {
        throw SmoothnessError(name() + ": derivative requested for a C0 function");
    }
    check_domain(x);
    switch (kind_) {
        case FnKind::Cosine: return -params_[0] * params_[1] * std::sin(params_[1] * x);
        case FnKind::Bump: {
            const double w = params_[1];
            const double s = (x - params_[2]) / w;
            if (std::abs(s) >= 1.0) {
                return 0.0;
            }
            return -4.0 * params_[0] * s * (1.0 - s * s) / w;
        }
        case FnKind::RationalH: {
            const double w2 = params_[0] * params_[0];
            const double d = (params_[0] - x) * (params_[0] + x);
            return (w2 + x * x) / (d * d);
        }
        case FnKind::AffineK: return params_[1];
        case FnKind::PowerK:
            return params_[1] * params_[2] * std::pow(x, params_[2] - 1.0);
        case FnKind::IdentityH: return params_[0];
        case FnKind::ExpBased: return params_[0] * params_[1] * std::exp(params_[1] * x);
        case FnKind::Custom:
            if (custom_derivative_) {
                return custom_derivative_(x);
            }
            throw SmoothnessError(name() + ": no derivative supplied");
        case FnKind::CustomTable: break;
    }
    throw SmoothnessError(name() + ": derivative unavailable");
}

bool ScalarFn::has_closed_primitive() const {
    switch (kind_) {
        case FnKind::CustomTable: return false;
        case FnKind::Custom: return static_cast<bool>(custom_primitive_);
        default: return true;
    }
}

double ScalarFn::primitive(double x) const {
    check_domain(x);
    switch (kind_) {
        case FnKind::Cosine: {
            const double a = params_[0];
            const double b = params_[1];
            return b == 0.0 ? a * x : a * std::sin(b * x) / b;
        }
        case FnKind::Bump: {
            const double a = params_[0];
            const double w = params_[1];
            const double c = params_[2];
            return a * w * (bump_antiderivative((x - c) / w) - bump_antiderivative(-c / w));
        }
        case FnKind::RationalH: {
            const double r = x / params_[0];
            return -0.5 * std::log1p(-r * r);
        }
        case FnKind::AffineK: return x * (params_[0] + 0.5 * params_[1] * x);
        case FnKind::PowerK: {
            const double p = params_[2];
            return params_[0] * x + params_[1] * std::pow(x, p + 1.0) / (p + 1.0);
        }
        case FnKind::IdentityH: return 0.5 * params_[0] * x * x;
        case FnKind::ExpBased: {
            const double r = params_[1];
            return params_[0] * (std::expm1(r * x) / r - x);
        }
        case FnKind::Custom:
            if (custom_primitive_) {
                return custom_primitive_(x);
            }
            break;
        case FnKind::CustomTable: break;
    }
    return primitive_by_quadrature(x);
}

double ScalarFn::primitive_by_quadrature(double x) const {
    check_domain(x);
    const auto integrand = [this](double t) { return eval_unchecked(t); };
    if (kind_ != FnKind::CustomTable) {
        return integrate_adaptive(integrand, 0.0, x);
    }
    // Split at the table's breakpoints so every panel sees a smooth integrand.
    const double lo = std::min(0.0, x);
    const double hi = std::max(0.0, x);
    double sum = 0.0;
    double left = lo;
    for (const double bp : table_x_) {
        if (bp > left && bp < hi) {
            sum += integrate_adaptive(integrand, left, bp);
            left = bp;
        }
    }
    sum += integrate_adaptive(integrand, left, hi);
    return x >= 0.0 ? sum : -sum;
}

}  // namespace kirchhoff
