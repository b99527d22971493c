#include "kirchhoff/discretization.hpp"

#include "kirchhoff/errors.hpp"
#include "kirchhoff/kernels.hpp"

#include <cmath>
#include <fmt/format.h>

namespace kirchhoff {

Grid1D::Grid1D(std::size_t n_interior) : n_(n_interior) {
    if (n_interior == 0) {
        throw DomainError("Grid1D: at least one interior node is required");
    }
}

Field::Field(Grid1D grid) : grid_(grid), coeffs_(grid.n_interior(), 0.0) {}

Field::Field(Grid1D grid, std::vector<double> coeffs) : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.n_interior()) {
        throw DomainError(fmt::format("Field: {} coefficients for a grid with {} interior nodes",
                                      coeffs_.size(), grid_.n_interior()));
    }
}

namespace {

void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) {
        throw DomainError("Field: operands live on different grids");
    }
}

}  // namespace

Field& Field::operator+=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        coeffs_[i] += other.coeffs_[i];
    }
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        coeffs_[i] -= other.coeffs_[i];
    }
    return *this;
}

Field& Field::operator*=(double a) {
    for (double& c : coeffs_) {
        c *= a;
    }
    return *this;
}

const QuadratureRule& default_rule() {
    static const QuadratureRule rule = QuadratureRule::gauss_legendre(5);
    return rule;
}

double norm_sq(const Field& u) { return kernels::omp::norm_sq(u.coeffs(), u.grid().delta()); }

double h1_distance(const Field& u, const Field& v) { return std::sqrt(norm_sq(u - v)); }

std::vector<double> stiffness_apply(const Field& u) {
    std::vector<double> out(u.size());
    kernels::omp::stiffness_apply(u.coeffs(), u.grid().delta(), out);
    return out;
}

double integrate_composed(const ScalarMap& phi, const Field& u, const QuadratureRule& rule) {
    return kernels::omp::integrate_composed(phi, u.coeffs(), u.grid().delta(), rule);
}

std::vector<double> load_vector(const ScalarMap& phi, const Field& u, const QuadratureRule& rule) {
    std::vector<double> out(u.size());
    kernels::omp::load_vector(phi, u.coeffs(), u.grid().delta(), rule, out);
    return out;
}

Field interpolate(const Grid1D& grid, const ScalarMap& expr) {
    std::vector<double> coeffs(grid.n_interior());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const double x = grid.node(i + 1);
        const double v = expr(x);
        if (!std::isfinite(v)) {
            throw NonFiniteError(fmt::format("interpolate: value {} at node x = {}", v, x));
        }
        coeffs[i] = v;
    }
    return Field(grid, std::move(coeffs));
}

std::vector<double> Tridiagonal::apply(std::span<const double> v) const {
    const std::size_t n = diag.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * v[i];
        if (i > 0) {
            s += off[i - 1] * v[i - 1];
        }
        if (i + 1 < n) {
            s += off[i] * v[i + 1];
        }
        out[i] = s;
    }
    return out;
}

Tridiagonal weighted_mass(const ScalarMap& weight, const Field& u, const QuadratureRule& rule) {
    const std::size_t n = u.size();
    Tridiagonal m{std::vector<double>(n), std::vector<double>(n > 0 ? n - 1 : 0)};
    kernels::omp::weighted_mass(weight, u.coeffs(), u.grid().delta(), rule, m.diag, m.off);
    return m;
}

std::vector<double> stiffness_solve(const Grid1D& grid, std::span<const double> b) {
    // S = (1/delta) tridiag(-1, 2, -1); solve (tridiag) x = delta * b.
    const std::size_t n = grid.n_interior();
    const double delta = grid.delta();
    std::vector<double> c(n);
    std::vector<double> x(n);
    double denom = 2.0;
    c[0] = -1.0 / denom;
    x[0] = delta * b[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = 2.0 + c[i - 1];
        c[i] = -1.0 / denom;
        x[i] = (delta * b[i] + x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c[i] * x[i + 1];
    }
    return x;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (const double v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

}  // namespace kirchhoff
