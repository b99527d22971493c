#include "kirchhoff/kernels.hpp"

#include <exception>
#include <vector>

namespace kirchhoff::kernels::omp {

namespace {

double node_value(std::span<const double> u, std::size_t node) {
    return (node == 0 || node == u.size() + 1) ? 0.0 : u[node - 1];
}

// Runs body(e) for e in [0, count) in parallel. The first exception (lowest
// element index) is rethrown on the calling thread.
template <typename Body>
void for_each_element(std::size_t count, Body&& body) {
    std::vector<std::exception_ptr> errors(count);
    bool failed = false;
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(static) if (count >= kParallelThreshold) reduction(|| : failed)
    for (long long e = 0; e < n; ++e) {
        try {
            body(static_cast<std::size_t>(e));
        } catch (...) {
            errors[static_cast<std::size_t>(e)] = std::current_exception();
            failed = true;
        }
    }
    if (failed) {
        for (const auto& err : errors) {
            if (err) {
                std::rethrow_exception(err);
            }
        }
    }
}

}  // namespace

double norm_sq(std::span<const double> u, double delta) {
    const std::size_t elements = u.size() + 1;
    std::vector<double> contrib(elements);
    for_each_element(elements, [&](std::size_t e) {
        const double d = node_value(u, e + 1) - node_value(u, e);
        contrib[e] = d * d / delta;
    });
    double sum = 0.0;
    for (const double c : contrib) {
        sum += c;
    }
    return sum;
}

void stiffness_apply(std::span<const double> u, double delta, std::span<double> out) {
    for_each_element(u.size(), [&](std::size_t j) {
        out[j] = (2.0 * u[j] - node_value(u, j) - node_value(u, j + 2)) / delta;
    });
}

double integrate_composed(const ScalarMap& phi, std::span<const double> u, double delta,
                          const QuadratureRule& rule) {
    const std::size_t elements = u.size() + 1;
    std::vector<double> contrib(elements);
    for_each_element(elements, [&](std::size_t e) {
        const double left = node_value(u, e);
        const double right = node_value(u, e + 1);
        double local = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q];
            local += rule.weights[q] * phi(left * (1.0 - s) + right * s);
        }
        contrib[e] = delta * local;
    });
    double sum = 0.0;
    for (const double c : contrib) {
        sum += c;
    }
    return sum;
}

void load_vector(const ScalarMap& phi, std::span<const double> u, double delta,
                 const QuadratureRule& rule, std::span<double> out) {
    const std::size_t n = u.size();
    std::vector<double> to_left(n + 1);
    std::vector<double> to_right(n + 1);
    for_each_element(n + 1, [&](std::size_t e) {
        const double left = node_value(u, e);
        const double right = node_value(u, e + 1);
        double l = 0.0;
        double r = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q];
            const double val = rule.weights[q] * phi(left * (1.0 - s) + right * s);
            l += val * (1.0 - s);
            r += val * s;
        }
        to_left[e] = delta * l;
        to_right[e] = delta * r;
    });
    // node j receives element j (as its right end) before element j + 1
    for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        v += to_right[j];
        v += to_left[j + 1];
        out[j] = v;
    }
}

void weighted_mass(const ScalarMap& weight, std::span<const double> u, double delta,
                   const QuadratureRule& rule, std::span<double> diag, std::span<double> off) {
    const std::size_t n = u.size();
    std::vector<double> ll(n + 1);
    std::vector<double> lr(n + 1);
    std::vector<double> rr(n + 1);
    for_each_element(n + 1, [&](std::size_t e) {
        const double left = node_value(u, e);
        const double right = node_value(u, e + 1);
        double a = 0.0;
        double b = 0.0;
        double c = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q];
            const double val = rule.weights[q] * weight(left * (1.0 - s) + right * s);
            a += val * (1.0 - s) * (1.0 - s);
            b += val * (1.0 - s) * s;
            c += val * s * s;
        }
        ll[e] = delta * a;
        lr[e] = delta * b;
        rr[e] = delta * c;
    });
    for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        v += rr[j];
        v += ll[j + 1];
        diag[j] = v;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        off[j] = lr[j + 1];
    }
}

}  // namespace kirchhoff::kernels::omp
