#pragma once

#include "kirchhoff/quadrature.hpp"
#include "kirchhoff/scalar_fn.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kirchhoff {

/// Uniform grid of (0, 1) with N interior nodes x_i = i / (N + 1).
class Grid1D {
public:
    /// Throws DomainError for N = 0.
    explicit Grid1D(std::size_t n_interior);

    [[nodiscard]] std::size_t n_interior() const { return n_; }
    [[nodiscard]] double delta() const { return 1.0 / static_cast<double>(n_ + 1); }
    /// Interior node i in 1..N.
    [[nodiscard]] double node(std::size_t i) const {
        return static_cast<double>(i) / static_cast<double>(n_ + 1);
    }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    std::size_t n_;
};

/// Element of the P1 subspace of H^1_0(0, 1): nodal values at the interior
/// nodes, zero at both ends.
class Field {
public:
    explicit Field(Grid1D grid);
    Field(Grid1D grid, std::vector<double> coeffs);

    static Field zero(Grid1D grid) { return Field(grid); }

    [[nodiscard]] const Grid1D& grid() const { return grid_; }
    [[nodiscard]] std::size_t size() const { return coeffs_.size(); }
    [[nodiscard]] std::span<const double> coeffs() const { return coeffs_; }
    [[nodiscard]] std::span<double> coeffs() { return coeffs_; }
    [[nodiscard]] const std::vector<double>& values() const { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double a);
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator-(Field a) { return a *= -1.0; }

    friend bool operator==(const Field&, const Field&) = default;

private:
    Grid1D grid_;
    std::vector<double> coeffs_;
};

/// 5-point Gauss-Legendre on the reference element.
const QuadratureRule& default_rule();

/// Integral of |u'|^2, exact for the piecewise-linear u.
double norm_sq(const Field& u);
/// sqrt(norm_sq(u - v)).
double h1_distance(const Field& u, const Field& v);
/// S u for the tridiagonal stiffness form S, so that u^T S v = integral of u' v'.
std::vector<double> stiffness_apply(const Field& u);
/// Integral over (0, 1) of phi(u(x)) by per-element quadrature.
/// Throws DomainError if phi is evaluated outside its domain.
double integrate_composed(const ScalarMap& phi, const Field& u,
                          const QuadratureRule& rule = default_rule());
/// b_i = integral of phi(u(x)) times the hat function at node i.
std::vector<double> load_vector(const ScalarMap& phi, const Field& u,
                                const QuadratureRule& rule = default_rule());
/// Field with coefficients expr(x_i). Throws NonFiniteError on NaN or inf.
Field interpolate(const Grid1D& grid, const ScalarMap& expr);

/// Tridiagonal weighted mass matrix with entries integral of weight(u) phi_i phi_j.
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // off[i] couples i and i + 1

    [[nodiscard]] std::vector<double> apply(std::span<const double> v) const;
};
Tridiagonal weighted_mass(const ScalarMap& weight, const Field& u,
                          const QuadratureRule& rule = default_rule());

/// Solves S x = b for the stiffness form (Thomas algorithm).
std::vector<double> stiffness_solve(const Grid1D& grid, std::span<const double> b);

double dot(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> a);

}  // namespace kirchhoff
