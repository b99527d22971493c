#include "kirchhoff/io.hpp"

#include "kirchhoff/errors.hpp"

#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <ostream>

namespace kirchhoff::io {

namespace {

// json has no infinity; non-finite values are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const Field& u) {
    return {{"n_interior", u.size()},
            {"coeffs", std::vector<double>(u.coeffs().begin(), u.coeffs().end())}};
}

Field field_from_json(const json& j) {
    try {
        const auto n = j.at("n_interior").get<std::size_t>();
        auto coeffs = j.at("coeffs").get<std::vector<double>>();
        if (coeffs.size() != n) {
            throw ConfigError(
                fmt::format("field: {} coefficients for n_interior = {}", coeffs.size(), n));
        }
        return Field(Grid1D(n), std::move(coeffs));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("field: {}", e.what()));
    } catch (const DomainError& e) {
        throw ConfigError(fmt::format("field: {}", e.what()));
    }
}

void write_field_csv(std::ostream& os, const Field& u) {
    os << "x,u\n";
    for (std::size_t i = 0; i < u.size(); ++i) {
        os << fmt::format("{},{}\n", u.grid().node(i + 1), u[i]);
    }
}

json to_json(const CriticalPoint& p) {
    return {{"energy", p.energy},
            {"norm", p.norm},
            {"residual_norm", p.residual_norm},
            {"origin", p.origin},
            {"u", to_json(p.u)}};
}

json to_json(const CriticalPointSet& set) {
    json points = json::array();
    for (const auto& p : set.points()) {
        points.push_back(to_json(p));
    }
    return {{"count", set.size()},
            {"max_norm", set.max_norm()},
            {"warnings", set.warnings()},
            {"points", std::move(points)}};
}

void write_points_csv(std::ostream& os, const CriticalPointSet& set) {
    os << "index,energy,norm,residual,origin\n";
    const auto& pts = set.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        os << fmt::format("{},{},{},{},{}\n", i, pts[i].energy, pts[i].norm, pts[i].residual_norm,
                          pts[i].origin);
    }
}

std::vector<Field> fields_from_json(const json& set, const Grid1D& grid) {
    std::vector<Field> out;
    try {
        for (const auto& p : set.at("points")) {
            Field u = field_from_json(p.at("u"));
            if (!(u.grid() == grid)) {
                throw ConfigError(fmt::format("solution has {} nodes, expected {}", u.size(),
                                              grid.n_interior()));
            }
            out.push_back(std::move(u));
        }
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("solution set: {}", e.what()));
    }
    return out;
}

double reverify_residuals(const ProblemSpec& spec, const json& set) {
    double worst = 0.0;
    for (const auto& u : fields_from_json(set, spec.grid())) {
        worst = std::max(worst, max_abs(residual(spec, u)));
    }
    return worst;
}

json to_json(const ThetaEstimate& est) {
    return {{"kind", std::string(to_string(est.kind))},
            {"value", number(est.value)},
            {"witness", {{"gamma", est.witness.gamma}, {"j", est.witness.j}}},
            {"witness_index", est.witness_index},
            {"refined", est.refined},
            {"negative", est.negative},
            {"warnings", est.warnings}};
}

json to_json(const MinimaxReport& rep) {
    const auto& c = rep.certificate;
    return {{"lhs", rep.lhs},
            {"rhs", rep.rhs},
            {"gap", rep.gap},
            {"mu", rep.mu},
            {"lambda_grid",
             {{"lo", rep.lambda_lo}, {"hi", rep.lambda_hi}, {"size", rep.lambda_count}}},
            {"lhs_lambda", rep.lhs_lambda},
            {"lhs_entry", rep.lhs_entry},
            {"certified", rep.certified},
            {"certificate",
             {{"available", c.available},
              {"witness_index", c.witness_index},
              {"epsilon", number(c.epsilon)},
              {"delta", number(c.delta)},
              {"nu", number(c.nu)},
              {"bound", number(c.bound)}}}};
}

json to_json(const Thm3Condition& c) {
    return {{"holds", c.holds},
            {"left_inf", number(c.left_inf)},
            {"left_index", c.left_index},
            {"right_inf", number(c.right_inf)},
            {"right_index", c.right_index}};
}

void write_cloud_csv(std::ostream& os, const SampleCloud& cloud) {
    os << "gamma,j\n";
    for (const auto& e : cloud.entries) {
        os << fmt::format("{},{}\n", e.gamma, e.j);
    }
}

SampleCloud read_cloud_csv(std::istream& is, std::string source) {
    SampleCloud cloud;
    cloud.source = std::move(source);
    std::string line;
    if (!std::getline(is, line) || line.rfind("gamma,j", 0) != 0) {
        throw ConfigError("cloud csv: expected header 'gamma,j'");
    }
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError(fmt::format("cloud csv: row {} has no comma", row));
        }
        try {
            const double gamma = std::stod(line.substr(0, comma));
            const double j = std::stod(line.substr(comma + 1));
            cloud.entries.push_back({gamma, j});
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("cloud csv: row {} is not numeric", row));
        }
    }
    try {
        cloud.validate();
    } catch (const DomainError& e) {
        throw ConfigError(fmt::format("cloud csv: {}", e.what()));
    }
    return cloud;
}

}  // namespace kirchhoff::io
