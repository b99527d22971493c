#pragma once

// Element-loop kernels for P1 elements on a uniform grid of (0, 1) with
// homogeneous Dirichlet ends. Coefficient j holds the value at node
// x_{j+1}; element e spans [x_e, x_{e+1}] for e = 0..N.
//
// `serial` is the reference implementation. `omp` evaluates element
// contributions in parallel and reduces them in element order, so both
// namespaces return bitwise identical results for any thread count.

#include "kirchhoff/quadrature.hpp"
#include "kirchhoff/scalar_fn.hpp"

#include <cstddef>
#include <span>

namespace kirchhoff::kernels {

/// Grids with fewer elements than this run the omp kernels on one thread.
inline constexpr std::size_t kParallelThreshold = 512;

namespace serial {

double norm_sq(std::span<const double> u, double delta);
void stiffness_apply(std::span<const double> u, double delta, std::span<double> out);
double integrate_composed(const ScalarMap& phi, std::span<const double> u, double delta,
                          const QuadratureRule& rule);
void load_vector(const ScalarMap& phi, std::span<const double> u, double delta,
                 const QuadratureRule& rule, std::span<double> out);
/// Tridiagonal matrix M_ij = integral of weight(u) phi_i phi_j; off[j] couples j and j+1.
void weighted_mass(const ScalarMap& weight, std::span<const double> u, double delta,
                   const QuadratureRule& rule, std::span<double> diag, std::span<double> off);

}  // namespace serial

namespace omp {

double norm_sq(std::span<const double> u, double delta);
void stiffness_apply(std::span<const double> u, double delta, std::span<double> out);
double integrate_composed(const ScalarMap& phi, std::span<const double> u, double delta,
                          const QuadratureRule& rule);
void load_vector(const ScalarMap& phi, std::span<const double> u, double delta,
                 const QuadratureRule& rule, std::span<double> out);
void weighted_mass(const ScalarMap& weight, std::span<const double> u, double delta,
                   const QuadratureRule& rule, std::span<double> diag, std::span<double> off);

}  // namespace omp

}  // namespace kirchhoff::kernels
