#include "kirchhoff/errors.hpp"
#include "kirchhoff/solver.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <omp.h>
#include <random>

using Catch::Matchers::WithinAbs;
using namespace kirchhoff;

namespace {

using BundlePtr = std::shared_ptr<const NonlinearityBundle>;

BundlePtr sine() {
    return std::make_shared<const NonlinearityBundle>(
        ScalarFn::cosine(), std::nullopt, ScalarFn::affine_k(1.0, 1.0), ScalarFn::rational_h(0.0));
}

BundlePtr linear() {
    return std::make_shared<const NonlinearityBundle>(
        ScalarFn::cosine(), std::nullopt, ScalarFn::affine_k(1.0, 0.0), ScalarFn::identity_h());
}

Field random_field(const Grid1D& grid, std::mt19937_64& rng, double radius) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Field u(grid);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = normal(rng);
    }
    return (radius / std::sqrt(norm_sq(u))) * u;
}

double nodal_distance(const Field& a, const Field& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

void require_same_sets(const CriticalPointSet& a, const CriticalPointSet& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (const auto& p : a.points()) {
        double best = INFINITY;
        for (const auto& q : b.points()) {
            best = std::min(best, nodal_distance(p.u, q.u));
        }
        CHECK(best <= tol);
    }
}

}  // namespace

TEST_CASE("SolverConfig validation", "[solver]") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_starts = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.newton_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("make_starts", "[solver]") {
    SolverConfig cfg;
    cfg.n_starts = 10;
    const Grid1D g(7);
    const auto starts = make_starts(g, cfg);
    REQUIRE(starts.size() == 10);
    double largest = 0.0;
    for (std::size_t i = 0; i + 1 < starts.size(); i += 2) {
        CHECK(starts[i + 1] == -starts[i]);
        largest = std::max(largest, std::sqrt(norm_sq(starts[i])));
    }
    CHECK(largest <= cfg.start_radius * (1.0 + 1e-12));
    CHECK(make_starts(g, cfg) == starts);
}

TEST_CASE("CriticalPointSet", "[solver]") {
    const Grid1D g(2);
    CriticalPointSet set;
    CHECK(set.insert({Field(g, {1.0, 0.0}), -1.0, 1.0, 0.0, "a"}, 1e-5));
    CHECK_FALSE(set.insert({Field(g, {1.0, 1e-9}), -1.0, 1.0, 0.0, "b"}, 1e-5));
    CHECK(set.insert({Field(g), 0.0, 0.0, 0.0, "c"}, 1e-5));
    CHECK(set.insert({Field(g, {-1.0, 0.0}), -1.0, 1.0, 0.0, "d"}, 1e-5));
    set.finalize();
    REQUIRE(set.size() == 3);
    CHECK(set.points().front().energy == -1.0);
    CHECK(set.points().back().energy == 0.0);
    CHECK(set.max_norm() == 1.0);
}

TEST_CASE("descend", "[solver]") {
    SolverConfig cfg;
    std::mt19937_64 rng(3);

    SECTION("strictly convex quadratic goes to 0") {
        const Grid1D g(15);
        const ProblemSpec s(linear(), g, 0.0, 0.0);
        const Field u = descend(s, random_field(g, rng, 5.0), cfg);
        CHECK(max_abs(u.coeffs()) < 1e-6);
    }

    SECTION("energy does not increase") {
        const Grid1D g(15);
        const ProblemSpec s(sine(), g, 80.0, 0.05);
        for (int i = 0; i < 5; ++i) {
            const Field u0 = random_field(g, rng, 0.3 + i);
            CHECK(energy(s, descend(s, u0, cfg)).total <= energy(s, u0).total);
        }
    }

    SECTION("sine benchmark hands off below the Newton threshold") {
        const Grid1D g(15);
        const ProblemSpec s(sine(), g, 50.0, 0.0);
        const Field u0 = interpolate(g, [](double x) { return std::sin(std::numbers::pi * x); });
        const Field u = descend(s, u0, cfg);
        CHECK(max_abs(residual(s, u)) <= 1e-7);
    }
}

TEST_CASE("newton_refine", "[solver]") {
    SolverConfig cfg;
    std::mt19937_64 rng(4);

    SECTION("linear problem converges at once") {
        const Grid1D g(15);
        const ProblemSpec s(linear(), g, 0.0, 0.0);
        NewtonTrace trace;
        const auto p = newton_refine(s, random_field(g, rng, 0.1), cfg, &trace);
        CHECK(p.residual_norm <= cfg.newton_tol);
        CHECK(max_abs(p.u.coeffs()) < 1e-12);
        const auto& r = trace.residual_norms;
        REQUIRE(r.size() >= 2);
        CHECK(r.back() <= 0.1 * r[r.size() - 2]);
    }

    SECTION("fixed points and their basins") {
        const Grid1D g(15);
        const ProblemSpec s(sine(), g, 144.0, 0.0);
        const auto set = find_all(s, cfg);
        REQUIRE(set.size() >= 3);
        for (const auto& p : set.points()) {
            NewtonTrace trace;
            const auto again = newton_refine(s, p.u, cfg, &trace);
            CHECK(trace.residual_norms.size() <= 2);
            CHECK(h1_distance(again.u, p.u) <= cfg.distinct_tol);

            std::normal_distribution<double> noise(0.0, 1e-3);
            Field q = p.u;
            for (std::size_t i = 0; i < q.size(); ++i) {
                q[i] += noise(rng);
            }
            CHECK(h1_distance(newton_refine(s, q, cfg).u, p.u) <= cfg.distinct_tol);
        }
    }
}

TEST_CASE("deflation", "[solver]") {
    const Grid1D g(15);
    const ProblemSpec s(sine(), g, 144.0, 0.0);
    SolverConfig cfg;
    const auto set = find_all(s, cfg);
    REQUIRE(set.size() >= 3);
    std::vector<Field> pts;
    for (const auto& p : set.points()) {
        pts.push_back(p.u);
    }
    const Deflation defl(pts, cfg.deflation_power, cfg.deflation_shift);
    std::mt19937_64 rng(6);
    for (const auto& u : pts) {
        CHECK(std::isinf(defl.deflated_residual_norm(s, u)));
        CHECK(std::isinf(defl.factor(u)));
        const Field near = u + random_field(g, rng, 1e-8);
        CHECK(defl.deflated_residual_norm(s, near) > cfg.newton_tol / cfg.distinct_tol);
    }
    SECTION("far field factor tends to the shift") {
        const Field far = random_field(g, rng, 1e6);
        CHECK_THAT(defl.factor(far), WithinAbs(std::pow(cfg.deflation_shift, 3.0), 1e-9));
    }
    SECTION("log gradient matches finite differences") {
        const Field u = random_field(g, rng, 0.7);
        const Field v = random_field(g, rng, 1.0);
        const auto grad = defl.log_gradient(u);
        const double h = 1e-6;
        const double fd =
            (std::log(defl.factor(u + h * v)) - std::log(defl.factor(u - h * v))) / (2.0 * h);
        CHECK_THAT(dot(grad, v.coeffs()), WithinAbs(fd, 1e-6 * (1.0 + std::abs(fd))));
    }
}

TEST_CASE("find_all", "[solver]") {
    SolverConfig cfg;

    SECTION("mu = 0 has only the trivial solution") {
        const Grid1D g(15);
        const auto set = find_all(ProblemSpec(sine(), g, 0.0, 0.3), cfg);
        REQUIRE(set.size() == 1);
        CHECK(max_abs(set.points()[0].u.coeffs()) < 1e-12);
    }

    SECTION("three distinct weak solutions at large mu") {
        const Grid1D g(15);
        const ProblemSpec s(sine(), g, 144.0, 0.02);
        const auto set = find_all(s, cfg);
        REQUIRE(set.size() >= 3);
        std::mt19937_64 rng(2);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const auto& p = set.points()[i];
            CHECK(p.residual_norm <= cfg.newton_tol);
            for (int t = 0; t < 10; ++t) {
                const Field v = random_field(g, rng, 1.0);
                CHECK(std::abs(dot(residual(s, p.u), v.coeffs())) <=
                      10.0 * cfg.newton_tol * std::sqrt(norm_sq(v)));
            }
            for (std::size_t j = i + 1; j < set.size(); ++j) {
                CHECK(h1_distance(p.u, set.points()[j].u) > cfg.distinct_tol);
            }
        }
    }

    SECTION("results do not depend on the thread count") {
        const Grid1D g(15);
        const ProblemSpec s(sine(), g, 144.0, -0.03);
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
        const auto a = find_all(s, cfg);
        omp_set_num_threads(3);
        const auto b = find_all(s, cfg);
        omp_set_num_threads(saved);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.points()[i].u == b.points()[i].u);
            CHECK(a.points()[i].energy == b.points()[i].energy);
            CHECK(a.points()[i].origin == b.points()[i].origin);
        }
    }
}

TEST_CASE("brute_force oracle on N = 2", "[solver][oracle]") {
    SolverConfig cfg;
    const Grid1D g(2);

    SECTION("mu = 0") {
        const ProblemSpec s(sine(), g, 0.0, 0.0);
        const auto truth = brute_force(s, {5.0, 101}, cfg);
        REQUIRE(truth.size() == 1);
        CHECK(max_abs(truth.points()[0].u.coeffs()) < 1e-10);
        require_same_sets(find_all(s, cfg), truth, 1e-3);
    }

    SECTION("mu = 50: the Kirchhoff term dominates") {
        const ProblemSpec s(sine(), g, 50.0, 0.0);
        const auto truth = brute_force(s, {10.0, 201}, cfg);
        CHECK(truth.size() == 1);
        require_same_sets(find_all(s, cfg), truth, 1e-3);
    }

    SECTION("mu = 500: three solutions") {
        const ProblemSpec s(sine(), g, 500.0, 0.0);
        const auto truth = brute_force(s, {10.0, 201}, cfg);
        REQUIRE(truth.size() == 3);
        require_same_sets(find_all(s, cfg), truth, 1e-3);
        CHECK_THAT(truth.points()[0].norm, WithinAbs(2.287396, 1e-5));
    }

    SECTION("preconditions") {
        const ProblemSpec big(sine(), Grid1D(4), 1.0, 0.0);
        CHECK_THROWS_AS(brute_force(big, {}, cfg), DomainError);
        const ProblemSpec s(sine(), g, 1.0, 0.0);
        CHECK_THROWS_AS(brute_force(s, {10.0, 2}, cfg), DomainError);
    }
}
