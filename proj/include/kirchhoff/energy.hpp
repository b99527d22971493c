#pragma once

#include "kirchhoff/discretization.hpp"
#include "kirchhoff/nonlinearity.hpp"

#include <memory>
#include <vector>

namespace kirchhoff {

/// One instance of the discrete energy
///   E(u) = 1/2 K(|u|^2) - int G(u) - mu H(int F(u) - lambda).
/// lambda is kept strictly inside (alpha_f, beta_f), which keeps
/// int F(u) - lambda inside the domain of h for every u.
class ProblemSpec {
public:
    /// Relative margin (in units of omega_f) kept between lambda and the ends.
    static constexpr double kLambdaMargin = 1e-9;

    /// Throws DomainError if mu < 0 or lambda is not inside the open interval.
    ProblemSpec(std::shared_ptr<const NonlinearityBundle> bundle, Grid1D grid, double mu,
                double lambda);

    [[nodiscard]] const NonlinearityBundle& bundle() const { return *bundle_; }
    [[nodiscard]] const std::shared_ptr<const NonlinearityBundle>& bundle_ptr() const {
        return bundle_;
    }
    [[nodiscard]] const Grid1D& grid() const { return grid_; }
    [[nodiscard]] double mu() const { return mu_; }
    [[nodiscard]] double lambda() const { return lambda_; }

    [[nodiscard]] ProblemSpec with_lambda(double lambda) const;
    [[nodiscard]] ProblemSpec with_mu(double mu) const;
    [[nodiscard]] ProblemSpec with_grid(Grid1D grid) const;

    /// The admissible lambda range, shrunk by kLambdaMargin.
    static std::pair<double, double> lambda_range(const NonlinearityBundle& bundle);

private:
    std::shared_ptr<const NonlinearityBundle> bundle_;
    Grid1D grid_;
    double mu_;
    double lambda_;
};

struct EnergyBreakdown {
    double kirchhoff = 0.0;  // 1/2 K(|u|^2)
    double g_part = 0.0;     // int G(u)
    double h_part = 0.0;     // mu H(J_f(u) - lambda)
    double total = 0.0;
    double jf = 0.0;         // J_f(u) = int F(u)
};

EnergyBreakdown energy(const ProblemSpec& spec, const Field& u);

/// J_f(u) = int F(u).
double jf(const NonlinearityBundle& bundle, const Field& u);

/// Weak residual r_i = k(|u|^2) int u' phi_i' - mu h(J_f(u) - lambda) int f(u) phi_i
///                   - int g(u) phi_i; the exact coefficient gradient of energy().
std::vector<double> residual(const ProblemSpec& spec, const Field& u);

enum class HessianMode { Auto, Analytic, FiniteDifference };

/// Linearization of the residual at a fixed u. Analytic mode precomputes the
/// local tridiagonal part and the two rank-one nonlocal terms coming from
/// k'(|u|^2) and h'(J_f(u) - lambda), after which each action is O(N).
class HessianOperator {
public:
    /// Auto picks Analytic when every function in the bundle is at least C1.
    /// Throws SmoothnessError if Analytic is forced on a C0 bundle.
    HessianOperator(const ProblemSpec& spec, const Field& u, HessianMode mode = HessianMode::Auto);

    [[nodiscard]] std::vector<double> apply(std::span<const double> v) const;
    [[nodiscard]] bool analytic() const { return analytic_; }
    /// Dense row-major N x N matrix assembled from N unit-vector actions.
    [[nodiscard]] std::vector<double> assemble() const;

private:
    ProblemSpec spec_;
    Field u_;
    bool analytic_;
    double k_ = 0.0;
    double kprime_ = 0.0;
    double h_ = 0.0;
    double hprime_ = 0.0;
    std::vector<double> su_;
    std::vector<double> bf_;
    Tridiagonal local_;  // mu h M_{f'} + M_{g'}
    double fd_step_ = 0.0;
};

std::vector<double> hessian_action(const ProblemSpec& spec, const Field& u, const Field& v,
                                   HessianMode mode = HessianMode::Auto);

/// |T(psi'(u)) - u| in the H^1_0 norm, where psi'(u) is represented by
/// k(|u|^2) u and T(v) = sigma(|v|) / |v| v.
double t_operator_check(const NonlinearityBundle& bundle, const Field& u);

struct GradientCheck {
    double analytic = 0.0;  // r(u)^T v
    double numeric = 0.0;   // finite difference of the energy along v
    double rel_error = 0.0; // |analytic - numeric| / (1 + |analytic|)
};

/// Two-point central difference of the energy along v.
GradientCheck gradient_check(const ProblemSpec& spec, const Field& u, const Field& v,
                             double step = 1e-5, double residual_scale = 1.0);
/// Five-point central stencil; exact up to rounding when the energy is a
/// polynomial of degree <= 4 along the line (mu = 0, g = 0, affine k).
GradientCheck gradient_check_five_point(const ProblemSpec& spec, const Field& u, const Field& v,
                                        double step = 1e-2, double residual_scale = 1.0);

}  // namespace kirchhoff
