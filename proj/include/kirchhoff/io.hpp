#pragma once

#include "kirchhoff/minimax.hpp"
#include "kirchhoff/solver.hpp"

#include <iosfwd>
#include <json.hpp>

namespace kirchhoff::io {

using json = nlohmann::json;

// Doubles are written in shortest round-trip form so reloads are exact.

/// {"n_interior": N, "coeffs": [...]}
json to_json(const Field& u);
/// Throws ConfigError on a malformed document.
Field field_from_json(const json& j);
/// Header "x,u"; one row per interior node.
void write_field_csv(std::ostream& os, const Field& u);

json to_json(const CriticalPoint& p);
json to_json(const CriticalPointSet& set);
/// Header "index,energy,norm,residual,origin".
void write_points_csv(std::ostream& os, const CriticalPointSet& set);

/// Reloads the points of a to_json(CriticalPointSet) document.
std::vector<Field> fields_from_json(const json& set, const Grid1D& grid);

/// Largest residual infinity norm of the stored points, recomputed from
/// their coefficients under spec.
double reverify_residuals(const ProblemSpec& spec, const json& set);

json to_json(const ThetaEstimate& est);
json to_json(const MinimaxReport& rep);
json to_json(const Thm3Condition& c);

/// Header "gamma,j".
void write_cloud_csv(std::ostream& os, const SampleCloud& cloud);
/// Throws ConfigError on a malformed file; the result is validated.
SampleCloud read_cloud_csv(std::istream& is, std::string source = "file");

}  // namespace kirchhoff::io
