#pragma once

#include "kirchhoff/scalar_fn.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace kirchhoff {

enum class Primitive { F, G, K, H };

/// Settings for the boundedness scan of F when the catalog has no metadata.
struct BoundsConfig {
    double scan_radius = 1e3;
    double cap = 1e9;
    std::size_t scan_points = 200001;
};

struct PrimitiveBounds {
    double alpha = 0.0;  // inf F (meas(0,1) = 1)
    double beta = 0.0;   // sup F
    double omega = 0.0;  // beta - alpha
    bool approximate = false;
};

/// inf, sup and oscillation of the primitive of f over the real line.
/// Throws DegenerateError if f vanishes identically and UnboundedError if the
/// scan sees |F| above the cap.
PrimitiveBounds bounds_of_primitive(const ScalarFn& f, const BoundsConfig& cfg = {});

/// The tuple (f, g, k, h) with cached bounds of F. g may be absent (g = 0).
class NonlinearityBundle {
public:
    NonlinearityBundle(ScalarFn f, std::optional<ScalarFn> g, ScalarFn k, ScalarFn h,
                       const BoundsConfig& cfg = {});

    [[nodiscard]] const ScalarFn& f() const { return f_; }
    [[nodiscard]] const std::optional<ScalarFn>& g() const { return g_; }
    [[nodiscard]] const ScalarFn& k() const { return k_; }
    [[nodiscard]] const ScalarFn& h() const { return h_; }

    [[nodiscard]] double alpha_f() const { return bounds_.alpha; }
    [[nodiscard]] double beta_f() const { return bounds_.beta; }
    [[nodiscard]] double omega_f() const { return bounds_.omega; }
    [[nodiscard]] const PrimitiveBounds& bounds() const { return bounds_; }
    /// (-omega_f, omega_f)
    [[nodiscard]] Interval h_domain() const { return Interval::open(-bounds_.omega, bounds_.omega); }

    /// Integral from 0 of the matching base function. Throws DomainError when
    /// xi leaves the primitive's domain (H: h_domain, K: [0, inf)).
    [[nodiscard]] double primitive(Primitive which, double xi) const;
    [[nodiscard]] double F(double xi) const { return f_.primitive(xi); }
    [[nodiscard]] double G(double xi) const { return g_ ? g_->primitive(xi) : 0.0; }
    [[nodiscard]] double K(double t) const { return primitive(Primitive::K, t); }
    [[nodiscard]] double H(double t) const { return primitive(Primitive::H, t); }

    [[nodiscard]] double g_value(double xi) const { return g_ ? (*g_)(xi) : 0.0; }
    [[nodiscard]] double h_value(double t) const;

    /// True when k, h and the derivatives used by the analytic Hessian exist.
    [[nodiscard]] bool smooth() const;

private:
    ScalarFn f_;
    std::optional<ScalarFn> g_;
    ScalarFn k_;
    ScalarFn h_;
    PrimitiveBounds bounds_;
};

double eval_primitive(const NonlinearityBundle& bundle, Primitive which, double xi);

struct AdmissibilityConfig {
    std::size_t samples = 10000;
    double t_max = 100.0;
    double zero_tol = 1e-14;
    BoundsConfig scan;
};

struct AdmissibilityReport {
    bool pass = true;
    std::string violated_clause;  // empty on pass
    double sup_abs_F = 0.0;
    double sup_G = 0.0;
};

/// Checks the hypotheses on (f, g, k, h) on a deterministic sample grid and
/// reports the first violated clause. Never throws for a violation.
AdmissibilityReport check_admissibility(const NonlinearityBundle& bundle,
                                        const AdmissibilityConfig& cfg = {});

/// The unique t >= 0 with t k(t^2) = s.
double sigma_inverse(const ScalarFn& k, double s);

}  // namespace kirchhoff
