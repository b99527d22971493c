#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace kirchhoff {

/// Gauss-Legendre nodes and weights mapped to the reference interval [0, 1].
/// Weights are positive and sum to one.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return points.size(); }

    static QuadratureRule gauss_legendre(std::size_t n);
};

struct AdaptiveOptions {
    double abs_tol = 1e-12;
    int max_depth = 40;
};

/// Adaptive Gauss-Legendre integration with 15-point panels.
/// A panel is accepted when its bisected estimate agrees with the undivided
/// one; throws QuadratureError when the recursion exceeds max_depth.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opts = {});

}  // namespace kirchhoff
