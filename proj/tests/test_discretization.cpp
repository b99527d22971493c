#include "kirchhoff/discretization.hpp"
#include "kirchhoff/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace kirchhoff;

namespace {

Field hat(const Grid1D& grid, std::size_t node) {
    Field u(grid);
    u[node] = 1.0;
    return u;
}

Field random_field(const Grid1D& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Field u(grid);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = normal(rng);
    }
    return u;
}

}  // namespace

TEST_CASE("grid and field basics", "[discretization]") {
    CHECK_THROWS_AS(Grid1D(0), DomainError);
    const Grid1D g(3);
    CHECK(g.delta() == 0.25);
    CHECK(g.node(2) == 0.5);
    CHECK_THROWS_AS(Field(g, {1.0, 2.0}), DomainError);

    const Field a(g, {1.0, 2.0, 3.0});
    const Field b(g, {0.5, 0.5, 0.5});
    CHECK((a + b).values() == std::vector<double>{1.5, 2.5, 3.5});
    CHECK((a - b).values() == std::vector<double>{0.5, 1.5, 2.5});
    CHECK((2.0 * a).values() == std::vector<double>{2.0, 4.0, 6.0});
    CHECK((-a).values() == std::vector<double>{-1.0, -2.0, -3.0});
    CHECK_THROWS_AS(a + Field(Grid1D(4)), DomainError);
}

TEST_CASE("norm_sq", "[discretization]") {
    const Grid1D g(3);
    CHECK(norm_sq(Field(g)) == 0.0);
    CHECK_THAT(norm_sq(hat(g, 1)), WithinAbs(8.0, 1e-14));

    SECTION("matches per-element quadrature of |u'|^2") {
        std::mt19937_64 rng(9);
        const Grid1D g9(9);
        const Field u = random_field(g9, rng);
        const auto rule = QuadratureRule::gauss_legendre(5);
        double q = 0.0;
        for (std::size_t e = 0; e <= u.size(); ++e) {
            const double left = e == 0 ? 0.0 : u[e - 1];
            const double right = e == u.size() ? 0.0 : u[e];
            const double slope = (right - left) / g9.delta();
            for (std::size_t k = 0; k < rule.size(); ++k) {
                q += rule.weights[k] * g9.delta() * slope * slope;
            }
        }
        CHECK_THAT(norm_sq(u), WithinAbs(q, 1e-12));
    }

    SECTION("positive definite and 2-homogeneous") {
        std::mt19937_64 rng(10);
        const Grid1D g15(15);
        for (int i = 0; i < 20; ++i) {
            const Field u = random_field(g15, rng);
            CHECK(norm_sq(u) > 0.0);
            CHECK_THAT(norm_sq(3.0 * u), WithinRel(9.0 * norm_sq(u), 1e-14));
        }
    }

    SECTION("agrees with the stiffness form") {
        std::mt19937_64 rng(12);
        const Grid1D g7(7);
        const Field u = random_field(g7, rng);
        CHECK_THAT(dot(u.coeffs(), stiffness_apply(u)), WithinRel(norm_sq(u), 1e-14));
        CHECK_THAT(h1_distance(u, Field(g7)), WithinRel(std::sqrt(norm_sq(u)), 1e-15));
    }
}

TEST_CASE("integrate_composed", "[discretization]") {
    const Grid1D g(3);
    const ScalarMap sine = [](double x) { return std::sin(x); };
    CHECK(integrate_composed(sine, Field(g)) == 0.0);
    CHECK_THAT(integrate_composed([](double x) { return x; }, hat(g, 1)), WithinAbs(0.25, 1e-15));

    SECTION("sin of a unit hat against a dense Riemann sum") {
        // Midpoint sum of sin(hat(x)) on 10^6 cells; the integrand is smooth on
        // each cell so the sum converges at second order.
        const Field u = hat(g, 1);
        const int m = 1000000;
        double sum = 0.0;
        for (int i = 0; i < m; ++i) {
            const double x = (i + 0.5) / m;
            const double v = std::max(0.0, 1.0 - std::abs(x - 0.5) / 0.25);
            sum += std::sin(v);
        }
        sum /= m;
        // exact value: 2 * 0.25 * (1 - cos 1)
        const double exact = 0.5 * (1.0 - std::cos(1.0));
        CHECK_THAT(sum, WithinAbs(exact, 1e-10));
        CHECK_THAT(integrate_composed(sine, u), WithinAbs(sum, 1e-10));
    }

    SECTION("exact for affine phi") {
        std::mt19937_64 rng(13);
        const Grid1D g31(31);
        const Field u = random_field(g31, rng);
        double trapezoid = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            trapezoid += u[i] * g31.delta();
        }
        CHECK_THAT(integrate_composed([](double x) { return 2.0 * x + 1.0; }, u),
                   WithinAbs(2.0 * trapezoid + 1.0, 1e-13));
    }

    SECTION("second-order refinement") {
        const ScalarMap expr = [](double x) { return 2.0 * std::sin(std::numbers::pi * x); };
        // exact limit: integral of sin(2 sin(pi x)) over (0,1)
        const double exact = integrate_adaptive(
            [](double x) { return std::sin(2.0 * std::sin(std::numbers::pi * x)); }, 0.0, 1.0);
        const double e1 = std::abs(integrate_composed(sine, interpolate(Grid1D(63), expr)) - exact);
        const double e2 = std::abs(integrate_composed(sine, interpolate(Grid1D(127), expr)) - exact);
        CHECK_THAT(e1 / e2, WithinAbs(4.0, 0.15));
    }
}

TEST_CASE("load_vector", "[discretization]") {
    const Grid1D g(3);
    const auto b = load_vector([](double x) { return std::cos(x); }, Field(g));
    for (const double v : b) {
        CHECK_THAT(v, WithinAbs(0.25, 1e-15));
    }
    for (const double v : load_vector([](double) { return 0.0; }, Field(g))) {
        CHECK(v == 0.0);
    }

    SECTION("gradient of the composed integral") {
        std::mt19937_64 rng(21);
        const Grid1D g15(15);
        const Field u = random_field(g15, rng);
        const Field v = random_field(g15, rng);
        const ScalarMap F = [](double x) { return std::sin(x); };
        const ScalarMap f = [](double x) { return std::cos(x); };
        const double step = 1e-4;
        const double fd = (integrate_composed(F, u + step * v) - integrate_composed(F, u - step * v)) /
                          (2.0 * step);
        CHECK_THAT(dot(load_vector(f, u), v.coeffs()), WithinAbs(fd, 1e-8));
    }
}

TEST_CASE("interpolate", "[discretization]") {
    const auto u = interpolate(Grid1D(3), [](double x) { return x * (1.0 - x); });
    CHECK(u.values() == std::vector<double>{0.1875, 0.25, 0.1875});
    CHECK(interpolate(Grid1D(5), [](double) { return 0.0; }) == Field(Grid1D(5)));

    const auto s = interpolate(Grid1D(9), [](double x) { return std::sin(std::numbers::pi * x); });
    CHECK_THAT(norm_sq(s), WithinRel(std::numbers::pi * std::numbers::pi / 2.0, 0.02));

    CHECK_THROWS_AS(interpolate(Grid1D(3), [](double x) { return 1.0 / (x - 0.5); }),
                    NonFiniteError);
}

TEST_CASE("weighted mass and stiffness solve", "[discretization]") {
    const Grid1D g(7);
    const auto m = weighted_mass([](double) { return 1.0; }, Field(g));
    for (const double d : m.diag) {
        CHECK_THAT(d, WithinAbs(2.0 * g.delta() / 3.0, 1e-15));
    }
    for (const double o : m.off) {
        CHECK_THAT(o, WithinAbs(g.delta() / 6.0, 1e-15));
    }

    std::mt19937_64 rng(4);
    const Field u = random_field(g, rng);
    const auto su = stiffness_apply(u);
    const auto back = stiffness_solve(g, su);
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK_THAT(back[i], WithinAbs(u[i], 1e-12));
    }
}
