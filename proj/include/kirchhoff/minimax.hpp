#pragma once

#include "kirchhoff/discretization.hpp"
#include "kirchhoff/nonlinearity.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kirchhoff {

struct CloudEntry {
    double gamma = 0.0;
    double j = 0.0;
};

/// Finite sample of (gamma(x), J(x)); always contains the base point (0, 0).
struct SampleCloud {
    std::vector<CloudEntry> entries;
    std::string source = "synthetic";

    /// Throws DomainError if (0, 0) is missing or an entry is not finite.
    void validate() const;
    [[nodiscard]] double j_min() const;
    [[nodiscard]] double j_max() const;
};

/// A cloud drawn from a bundle: gamma(u) = 1/2 K(|u|^2) - int G(u), j = J_f(u).
struct BundleCloud {
    SampleCloud cloud;
    std::vector<Field> fields;  // fields[i] produced cloud.entries[i]
};

struct CloudOptions {
    std::size_t samples = 10000;
    std::vector<double> radii = {1e-3, 1e-2, 0.1, 0.3, 1.0, 3.0};  // H^1_0 norms, cycled
    std::uint64_t seed = 1;
};

/// Random fields are smooth sine series with 1/m^2 decaying coefficients,
/// rescaled to the radius ladder. Entry 0 is the zero field.
BundleCloud make_bundle_cloud(const NonlinearityBundle& bundle, const Grid1D& grid,
                              const CloudOptions& opts);

CloudEntry cloud_entry(const NonlinearityBundle& bundle, const Field& u);

enum class ThetaKind {
    Theta,      // j strictly inside (min j, max j), j != 0
    ThetaStar,  // bundle-sourced, phi = H, j != 0
    ThetaHat,   // j != 0
};

std::string_view to_string(ThetaKind kind);

struct ThetaEstimate {
    double value = 0.0;
    CloudEntry witness;
    std::size_t witness_index = 0;
    ThetaKind kind = ThetaKind::ThetaHat;
    bool negative = false;  // theta < 0 violates the hypothesis; reported, not thrown
    bool refined = false;
    std::vector<std::string> warnings;
};

/// min of gamma / phi(j) over admissible entries. Throws EmptyAdmissible.
ThetaEstimate estimate_theta(const SampleCloud& cloud, const ScalarMap& phi,
                             ThetaKind kind = ThetaKind::ThetaHat);

/// theta* for a bundle cloud: sampled minimum of the ratio with phi = H,
/// then Nelder-Mead descent on the ratio from the witness field.
ThetaEstimate estimate_theta_star(const NonlinearityBundle& bundle, const BundleCloud& cloud,
                                  int refine_iterations = 200);

/// Proof quantities of the strict minimax inequality, extracted from the
/// entry x1 minimizing gamma - mu phi(j) over j != 0.
struct GapCertificate {
    bool available = false;  // false when no entry has gamma - mu phi(j) < 0
    std::size_t witness_index = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double nu = 0.0;
    double bound = 0.0;      // max(-epsilon, -mu nu)
};

struct MinimaxReport {
    double lhs = 0.0;  // sup_lambda inf_x (gamma - mu phi(j - lambda))
    double rhs = 0.0;  // inf_x sup_lambda (...)
    double gap = 0.0;  // rhs - lhs
    double mu = 0.0;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    std::size_t lambda_count = 0;
    double lhs_lambda = 0.0;         // lambda attaining lhs
    std::size_t lhs_entry = 0;       // entry attaining the inner infimum there
    bool certified = false;          // lhs < -kGapTol
    GapCertificate certificate;

    static constexpr double kGapTol = 1e-9;
};

/// Scans both sides of the minimax inequality on a uniform lambda grid over
/// (min j, max j) shrunk by a relative 1e-9; the outer supremum is then
/// polished by golden section (the inner infimum is concave in lambda for
/// convex phi). Throws DegenerateInterval when min j == max j.
MinimaxReport prop1_check(const SampleCloud& cloud, const ScalarMap& phi, double mu,
                          std::size_t lambda_grid_size = 10000);

struct Thm3Condition {
    bool holds = false;
    double left_inf = 0.0;   // inf (psi - mu (e^J - 1))
    std::size_t left_index = 0;
    double right_inf = 0.0;  // inf (psi - mu J)
    std::size_t right_index = 0;
};

/// inf (psi - mu (e^J - 1)) < 0 <= inf (psi - mu J) over paired samples. The
/// right inequality allows 8 eps times the largest |psi| + mu |J|.
Thm3Condition thm3_condition(std::span<const double> psi, std::span<const double> j, double mu);

struct OpenInterval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool empty() const { return !(lo < hi); }
};

/// {mu e^{-nu} : nu in B} = (mu e^{-sup B}, mu e^{-inf B}).
OpenInterval thm3_interval_map(double mu, OpenInterval b);

/// max_i | mu (e^{j - nu} - 1) j'_i + mu j'_i - mu e^{-nu} e^{j} j'_i |.
double thm3_residual_identity(double j, std::span<const double> jprime, double mu, double nu);

}  // namespace kirchhoff
