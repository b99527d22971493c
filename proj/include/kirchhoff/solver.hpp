#pragma once

#include "kirchhoff/energy.hpp"
#include "kirchhoff/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kirchhoff {

struct SolverConfig {
    std::size_t n_starts = 64;
    std::uint64_t seed = 1;
    double newton_tol = 1e-10;       // residual infinity norm
    int max_newton = 50;
    double deflation_power = 2.0;
    double deflation_shift = 1.0;
    double distinct_tol = 1e-5;      // H^1_0 distance
    double start_radius = 10.0;      // H^1_0 norm of the largest start
    int max_descent = 5000;
    int max_rounds = 8;              // deflated sweeps after the first
    HessianMode hessian = HessianMode::Auto;

    /// Throws DomainError on non-positive tolerances or n_starts == 0.
    void validate() const;
};

struct CriticalPoint {
    Field u;
    double energy = 0.0;
    double norm = 0.0;           // H^1_0
    double residual_norm = 0.0;  // infinity norm
    std::string origin;          // "start:i", "deflation:r/start:i" or "grid:i"
};

class CriticalPointSet {
public:
    /// Adds p unless a member lies within distinct_tol; returns true if added.
    bool insert(CriticalPoint p, double distinct_tol);
    /// Sorts by energy (ties by norm, then coefficients).
    void finalize();

    [[nodiscard]] const std::vector<CriticalPoint>& points() const { return points_; }
    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] bool empty() const { return points_.empty(); }
    /// Largest member norm: the empirical rho.
    [[nodiscard]] double max_norm() const;
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

private:
    std::vector<CriticalPoint> points_;
    std::vector<std::string> warnings_;
};

/// Thrown by descend(); carries the last accepted iterate.
class DescentStall : public StallError {
public:
    DescentStall(const std::string& what, Field last) : StallError(what), last_(std::move(last)) {}
    [[nodiscard]] const Field& last() const { return last_; }

private:
    Field last_;
};

/// Armijo backtracking descent on the energy along the H^1_0 (Sobolev)
/// gradient S^{-1} r until |r|_inf <= 1e3 newton_tol.
Field descend(const ProblemSpec& spec, const Field& u0, const SolverConfig& cfg);

struct NewtonTrace {
    std::vector<double> residual_norms;  // infinity norm per iterate
};

/// Damped Newton on the residual with a dense Hessian. Throws NoConvergence
/// or SingularSystem.
CriticalPoint newton_refine(const ProblemSpec& spec, const Field& u0, const SolverConfig& cfg,
                            NewtonTrace* trace = nullptr);

/// Shifted deflation M(u) = prod_i (1 / d(u, u_i)^p + shift), d the H^1_0 distance.
class Deflation {
public:
    Deflation(std::vector<Field> points, double power, double shift);

    [[nodiscard]] double factor(const Field& u) const;
    /// Gradient of log M with respect to the coefficients.
    [[nodiscard]] std::vector<double> log_gradient(const Field& u) const;
    /// M(u) |r(u)|_inf; +inf at a deflated point.
    [[nodiscard]] double deflated_residual_norm(const ProblemSpec& spec, const Field& u) const;
    [[nodiscard]] bool empty() const { return points_.empty(); }

private:
    std::vector<Field> points_;
    double power_;
    double shift_;
};

/// Newton on the deflated residual M(u) r(u), polished by newton_refine.
/// Returns nothing when the iteration fails.
std::optional<CriticalPoint> deflated_newton(const ProblemSpec& spec, const Field& u0,
                                             const Deflation& deflation, const SolverConfig& cfg);

/// Deterministic start ladder: antithetic pairs of random nodal vectors with
/// H^1_0 norms spread over (0, start_radius].
std::vector<Field> make_starts(const Grid1D& grid, const SolverConfig& cfg);

/// Multi-start descent and Newton, followed by deflated sweeps until a sweep
/// adds nothing. Deterministic for a fixed seed regardless of thread count.
CriticalPointSet find_all(const ProblemSpec& spec, const SolverConfig& cfg);

struct BruteForceOptions {
    double box = 10.0;             // coefficients range over [-box, box]
    std::size_t resolution = 201;  // grid points per axis
};

/// Ground truth for N <= 3: scan |r| on a tensor grid, Newton-refine its local
/// minima. Records a warning when distinct solutions share a grid cell.
CriticalPointSet brute_force(const ProblemSpec& spec, const BruteForceOptions& opts,
                             const SolverConfig& cfg);

}  // namespace kirchhoff
