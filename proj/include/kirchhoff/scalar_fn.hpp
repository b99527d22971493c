#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kirchhoff {

using ScalarMap = std::function<double(double)>;

enum class FnKind {
    Cosine,       // a cos(b x)
    Bump,         // a (1 - s^2)^2 on |s| < 1, s = (x - c) / w
    RationalH,    // t / (w^2 - t^2) on (-w, w)
    AffineK,      // a + b t on [0, inf)
    PowerK,       // a + b t^p on [0, inf)
    IdentityH,    // c t
    ExpBased,     // a (exp(r t) - 1)
    CustomTable,  // piecewise-linear table, constant beyond its ends
    Custom,       // programmatic closure, not loadable from config
};

enum class Smoothness { C0, C1, Analytic };

std::string_view to_string(FnKind kind);
std::string_view to_string(Smoothness s);

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    bool hi_closed = false;

    [[nodiscard]] bool contains(double x) const {
        const bool above = lo_closed ? x >= lo : x > lo;
        const bool below = hi_closed ? x <= hi : x < hi;
        return above && below;
    }
    [[nodiscard]] bool bounded() const;
    static Interval real_line() { return {}; }
    static Interval half_line() { return {0.0, std::numeric_limits<double>::infinity(), true, false}; }
    static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
};

struct Bounds {
    double inf = 0.0;
    double sup = 0.0;
};

/// Extra metadata for programmatic (Custom) functions.
struct CustomTraits {
    Interval domain = Interval::real_line();
    Smoothness smoothness = Smoothness::C0;
    bool monotone_nondecreasing = false;
    std::optional<Bounds> known_bounds;
    std::optional<Bounds> primitive_bounds;
    ScalarMap derivative;
    ScalarMap primitive;
};

/// A catalogued real function of one variable together with the metadata
/// the admissibility checks rely on. Immutable after construction.
class ScalarFn {
public:
    static ScalarFn cosine(double amp = 1.0, double freq = 1.0);
    static ScalarFn bump(double amp = 1.0, double width = 1.0, double center = 0.0);
    /// t / (w^2 - t^2). A non-positive or NaN width marks it as "auto": the
    /// bundle substitutes the oscillation of F.
    static ScalarFn rational_h(double half_width);
    static ScalarFn affine_k(double a, double b);
    static ScalarFn power_k(double a, double b, double p);
    static ScalarFn identity_h(double slope = 1.0);
    static ScalarFn exp_based(double amp = 1.0, double rate = 1.0);
    static ScalarFn table(std::vector<double> xs, std::vector<double> ys);
    static ScalarFn custom(std::string name, ScalarMap value, CustomTraits traits = {});

    /// Builds a catalog entry from its config name and parameter list.
    /// Throws ConfigError on unknown kinds or malformed parameters.
    static ScalarFn from_kind(std::string_view kind, std::span<const double> params);

    /// Throws DomainError outside domain().
    double operator()(double x) const;
    /// Throws SmoothnessError for C0 entries.
    double derivative(double x) const;
    /// Integral from 0 to x: closed form when available, adaptive quadrature otherwise.
    double primitive(double x) const;
    [[nodiscard]] bool has_closed_primitive() const;
    /// Integral from 0 to x by adaptive Gauss-Legendre, ignoring any closed form.
    double primitive_by_quadrature(double x) const;

    [[nodiscard]] FnKind kind() const { return kind_; }
    [[nodiscard]] std::string name() const;
    [[nodiscard]] const std::vector<double>& params() const { return params_; }
    [[nodiscard]] Smoothness smoothness() const { return smoothness_; }
    [[nodiscard]] bool monotone_nondecreasing() const { return monotone_; }
    [[nodiscard]] const std::optional<Bounds>& known_bounds() const { return known_bounds_; }
    [[nodiscard]] const std::optional<Bounds>& primitive_bounds() const { return primitive_bounds_; }
    [[nodiscard]] const Interval& domain() const { return domain_; }
    [[nodiscard]] bool is_auto_width() const;

private:
    ScalarFn() = default;
    double eval_unchecked(double x) const;
    void check_domain(double x) const;

    FnKind kind_ = FnKind::Custom;
    std::vector<double> params_;
    std::vector<double> table_x_;
    std::vector<double> table_y_;
    Smoothness smoothness_ = Smoothness::C0;
    bool monotone_ = false;
    std::optional<Bounds> known_bounds_;
    std::optional<Bounds> primitive_bounds_;
    Interval domain_;
    std::string custom_name_;
    ScalarMap custom_value_;
    ScalarMap custom_derivative_;
    ScalarMap custom_primitive_;
};

}  // namespace kirchhoff
