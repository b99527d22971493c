#include "kirchhoff/kernels.hpp"

namespace kirchhoff::kernels::serial {

namespace {

double node_value(std::span<const double> u, std::size_t node) {
    // node in 0..N+1; the two ends carry the Dirichlet zero
    return (node == 0 || node == u.size() + 1) ? 0.0 : u[node - 1];
}

}  // namespace

double norm_sq(std::span<const double> u, double delta) {
    double sum = 0.0;
    for (std::size_t e = 0; e <= u.size(); ++e) {
        const double d = node_value(u, e + 1) - node_value(u, e);
        sum += d * d / delta;
    }
    return sum;
}

void stiffness_apply(std::span<const double> u, double delta, std::span<double> out) {
    for (std::size_t j = 0; j < u.size(); ++j) {
        out[j] = (2.0 * u[j] - node_value(u, j) - node_value(u, j + 2)) / delta;
    }
}

double integrate_composed(const ScalarMap& phi, std::span<const double> u, double delta,
                          const QuadratureRule& rule) {
    double sum = 0.0;
    for (std::size_t e = 0; e <= u.size(); ++e) {
        const double left = node_value(u, e);
        const double right = node_value(u, e + 1);
        double local = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q];
            local += rule.weights[q] * phi(left * (1.0 - s) + right * s);
        }
        sum += delta * local;
    }
    return sum;
}

void load_vector(const ScalarMap& phi, std::span<const double> u, double delta,
                 const QuadratureRule& rule, std::span<double> out) {
    for (double& v : out) {
        v = 0.0;
    }
    const std::size_t n = u.size();
    for (std::size_t e = 0; e <= n; ++e) {
        const double left = node_value(u, e);
        const double right = node_value(u, e + 1);
        double to_left = 0.0;
        double to_right = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q];
            const double val = rule.weights[q] * phi(left * (1.0 - s) + right * s);
            to_left += val * (1.0 - s);
            to_right += val * s;
        }
        if (e >= 1) {
            out[e - 1] += delta * to_left;
        }
        if (e < n) {
            out[e] += delta * to_right;
        }
    }
}

void weighted_mass(const ScalarMap& weight, std::span<const double> u, double delta,
                   const QuadratureRule& rule, std::span<double> diag, std::span<double> off) {
    for (double& v : diag) {
        v = 0.0;
    }
    for (double& v : off) {
        v = 0.0;
    }
    const std::size_t n = u.size();
    for (std::size_t e = 0; e <= n; ++e) {
        const double left = node_value(u, e);
        const double right = node_value(u, e + 1);
        double ll = 0.0;
        double lr = 0.0;
        double rr = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q];
            const double val = rule.weights[q] * weight(left * (1.0 - s) + right * s);
            ll += val * (1.0 - s) * (1.0 - s);
            lr += val * (1.0 - s) * s;
            rr += val * s * s;
        }
        if (e >= 1) {
            diag[e - 1] += delta * ll;
        }
        if (e < n) {
            diag[e] += delta * rr;
        }
        if (e >= 1 && e < n) {
            off[e - 1] = delta * lr;
        }
    }
}

}  // namespace kirchhoff::kernels::serial
