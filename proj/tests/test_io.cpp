#include "kirchhoff/errors.hpp"
#include "kirchhoff/io.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace kirchhoff;

TEST_CASE("Field round trip", "[io]") {
    const Field u(Grid1D(3), {0.1, -2.0 / 3.0, 1e-300});
    const auto j = io::to_json(u);
    CHECK(io::field_from_json(j) == u);
    CHECK(io::field_from_json(io::json::parse(j.dump())) == u);

    std::ostringstream csv;
    io::write_field_csv(csv, u);
    CHECK(csv.str() == "x,u\n0.25,0.1\n0.5,-0.6666666666666666\n0.75,1e-300\n");

    CHECK_THROWS_AS(io::field_from_json(io::json{{"n_interior", 2}, {"coeffs", {1.0}}}),
                    ConfigError);
    CHECK_THROWS_AS(io::field_from_json(io::json{{"coeffs", {1.0}}}), ConfigError);
}

TEST_CASE("CriticalPointSet serialization and re-verification", "[io]") {
    auto bundle = std::make_shared<const NonlinearityBundle>(
        ScalarFn::cosine(), std::nullopt, ScalarFn::affine_k(1.0, 1.0), ScalarFn::rational_h(0.0));
    const ProblemSpec spec(bundle, Grid1D(2), 500.0, 0.0);
    const auto set = find_all(spec, SolverConfig{});
    REQUIRE(set.size() == 3);

    const auto j = io::json::parse(io::to_json(set).dump());
    CHECK(j.at("count") == 3);
    CHECK(j.at("points").size() == 3);
    const auto fields = io::fields_from_json(j, spec.grid());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        CHECK(fields[i] == set.points()[i].u);
    }
    CHECK(io::reverify_residuals(spec, j) <= 1e-10);
    CHECK_THROWS_AS(io::fields_from_json(j, Grid1D(3)), ConfigError);

    std::ostringstream csv;
    io::write_points_csv(csv, set);
    CHECK(csv.str().rfind("index,energy,norm,residual,origin\n", 0) == 0);
}

TEST_CASE("cloud CSV", "[io]") {
    const SampleCloud c{{{0.0, 0.0}, {1.5, -0.25}, {2.0, 1e-17}}, "synthetic"};
    std::ostringstream out;
    io::write_cloud_csv(out, c);
    CHECK(out.str() == "gamma,j\n0,0\n1.5,-0.25\n2,1e-17\n");

    std::istringstream in(out.str());
    const auto back = io::read_cloud_csv(in);
    REQUIRE(back.entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.entries[i].gamma == c.entries[i].gamma);
        CHECK(back.entries[i].j == c.entries[i].j);
    }

    std::istringstream no_header("0,0\n");
    CHECK_THROWS_AS(io::read_cloud_csv(no_header), ConfigError);
    std::istringstream no_base("gamma,j\n1,1\n");
    CHECK_THROWS_AS(io::read_cloud_csv(no_base), ConfigError);
    std::istringstream junk("gamma,j\n0,0\nabc,1\n");
    CHECK_THROWS_AS(io::read_cloud_csv(junk), ConfigError);
}

TEST_CASE("report JSON", "[io]") {
    const SampleCloud c{{{0.0, 0.0}, {1.0, 1.0}}, "synthetic"};
    const ScalarMap sq = [](double t) { return t * t; };
    const auto rep = io::to_json(prop1_check(c, sq, 2.0));
    CHECK(rep.at("rhs") == 0.0);
    CHECK(std::abs(rep.at("lhs").get<double>() + 0.125) < 1e-9);
    CHECK(rep.at("certified") == true);
    CHECK(rep.at("lambda_grid").at("size") == 10000);

    const auto th = io::to_json(estimate_theta(c, sq));
    CHECK(th.at("kind") == "theta_hat");
    CHECK(th.at("value") == 1.0);
    CHECK(th.at("witness").at("j") == 1.0);
}
