#include "kirchhoff/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <random>

namespace kirchhoff {

void SolverConfig::validate() const {
    if (n_starts == 0) {
        throw DomainError("solver: n_starts must be at least 1");
    }
    for (const double v : {newton_tol, distinct_tol, start_radius, deflation_power}) {
        if (!(v > 0.0)) {
            throw DomainError("solver: tolerances, radius and deflation power must be positive");
        }
    }
    if (!(deflation_shift >= 0.0) || max_newton < 1 || max_descent < 1 || max_rounds < 0) {
        throw DomainError("solver: invalid iteration limits or deflation shift");
    }
}

bool CriticalPointSet::insert(CriticalPoint p, double distinct_tol) {
    for (const auto& q : points_) {
        if (h1_distance(q.u, p.u) <= distinct_tol) {
            return false;
        }
    }
    points_.push_back(std::move(p));
    return true;
}

void CriticalPointSet::finalize() {
    std::stable_sort(points_.begin(), points_.end(),
                     [](const CriticalPoint& a, const CriticalPoint& b) {
                         if (a.energy != b.energy) {
                             return a.energy < b.energy;
                         }
                         if (a.norm != b.norm) {
                             return a.norm < b.norm;
                         }
                         return a.u.values() < b.u.values();
                     });
}

double CriticalPointSet::max_norm() const {
    double m = 0.0;
    for (const auto& p : points_) {
        m = std::max(m, p.norm);
    }
    return m;
}

namespace {

CriticalPoint make_point(const ProblemSpec& spec, Field u, std::span<const double> r,
                         std::string origin = {}) {
    CriticalPoint p{std::move(u), 0.0, 0.0, max_abs(r), std::move(origin)};
    p.energy = energy(spec, p.u).total;
    p.norm = std::sqrt(norm_sq(p.u));
    return p;
}

double l2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

// Solves H x = -r with partial-pivot LU; throws SingularSystem when the
// reciprocal condition estimate is negligible.
std::vector<double> newton_direction(const HessianOperator& op, std::span<const double> r) {
    const auto n = static_cast<Eigen::Index>(r.size());
    const std::vector<double> dense = op.assemble();
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        hess(dense.data(), n, n);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(hess);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-15)) {
        throw SingularSystem(fmt::format("Newton system is singular (condition estimate {:.3e})",
                                         rcond > 0.0 ? 1.0 / rcond : HUGE_VAL));
    }
    const Eigen::Map<const Eigen::VectorXd> rhs(r.data(), n);
    const Eigen::VectorXd x = lu.solve(-rhs);
    std::vector<double> out(x.data(), x.data() + n);
    for (const double v : out) {
        if (!std::isfinite(v)) {
            throw SingularSystem("Newton step is not finite");
        }
    }
    return out;
}

Field step(const Field& u, std::span<const double> dir, double alpha) {
    Field out = u;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += alpha * dir[i];
    }
    return out;
}

}  // namespace

Field descend(const ProblemSpec& spec, const Field& u0, const SolverConfig& cfg) {
    const double handoff = 1e3 * cfg.newton_tol;
    Field u = u0;
    double e = energy(spec, u).total;
    double alpha = 1.0;
    for (int it = 0; it < cfg.max_descent; ++it) {
        const auto r = residual(spec, u);
        if (max_abs(r) <= handoff) {
            return u;
        }
        std::vector<double> dir = stiffness_solve(u.grid(), r);
        double slope = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) {
            dir[i] = -dir[i];
            slope += r[i] * dir[i];
        }
        alpha = std::min(2.0 * alpha, 1e6);
        bool accepted = false;
        while (alpha > 1e-14) {
            Field trial = step(u, dir, alpha);
            double et = std::numeric_limits<double>::infinity();
            try {
                et = energy(spec, trial).total;
            } catch (const DomainError&) {
            }
            if (et <= e + 1e-4 * alpha * slope) {
                u = std::move(trial);
                e = et;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            throw DescentStall(fmt::format("descend: line search collapsed at |r|_inf = {:.3e}",
                                           max_abs(r)),
                               u);
        }
    }
    throw DescentStall(fmt::format("descend: no handoff after {} iterations", cfg.max_descent), u);
}

CriticalPoint newton_refine(const ProblemSpec& spec, const Field& u0, const SolverConfig& cfg,
                            NewtonTrace* trace) {
    Field u = u0;
    std::vector<double> r = residual(spec, u);
    for (int it = 0;; ++it) {
        const double rn = max_abs(r);
        if (trace != nullptr) {
            trace->residual_norms.push_back(rn);
        }
        if (rn <= cfg.newton_tol) {
            return make_point(spec, std::move(u), r);
        }
        if (it >= cfg.max_newton || !std::isfinite(rn)) {
            throw NoConvergence(fmt::format("newton_refine: |r|_inf = {:.3e} after {} iterations",
                                            rn, it));
        }
        const HessianOperator op(spec, u, cfg.hessian);
        const auto dir = newton_direction(op, r);
        const double r0 = l2(r);
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 11; ++ls, alpha *= 0.5) {
            Field trial = step(u, dir, alpha);
            try {
                auto rt = residual(spec, trial);
                if (l2(rt) < (1.0 - 1e-4 * alpha) * r0) {
                    u = std::move(trial);
                    r = std::move(rt);
                    accepted = true;
                    break;
                }
            } catch (const DomainError&) {
            }
        }
        if (!accepted) {
            // No decrease along the Newton direction: take the full step and
            // let the iteration cap decide.
            u = step(u, dir, 1.0);
            r = residual(spec, u);
        }
    }
}

Deflation::Deflation(std::vector<Field> points, double power, double shift)
    : points_(std::move(points)), power_(power), shift_(shift) {}

double Deflation::factor(const Field& u) const {
    double m = 1.0;
    for (const auto& p : points_) {
        const double d = h1_distance(u, p);
        m *= 1.0 / std::pow(d, power_) + shift_;
    }
    return m;
}

std::vector<double> Deflation::log_gradient(const Field& u) const {
    std::vector<double> g(u.size(), 0.0);
    for (const auto& p : points_) {
        const Field diff = u - p;
        const double d2 = norm_sq(diff);
        const double d = std::sqrt(d2);
        const double dp = std::pow(d, -power_);
        // d/du log(d^-p + s) = -p d^{-p-2} S (u - p) / (d^-p + s)
        const double coeff = -power_ * dp / d2 / (dp + shift_);
        const auto sd = stiffness_apply(diff);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] += coeff * sd[i];
        }
    }
    return g;
}

double Deflation::deflated_residual_norm(const ProblemSpec& spec, const Field& u) const {
    const double m = factor(u);
    if (!std::isfinite(m)) {
        return std::numeric_limits<double>::infinity();
    }
    return m * max_abs(residual(spec, u));
}

std::optional<CriticalPoint> deflated_newton(const ProblemSpec& spec, const Field& u0,
                                             const Deflation& deflation, const SolverConfig& cfg) {
    try {
        Field u = u0;
        std::vector<double> r = residual(spec, u);
        double merit = deflation.factor(u) * l2(r);
        for (int it = 0; it < cfg.max_newton; ++it) {
            if (max_abs(r) <= 1e3 * cfg.newton_tol) {
                return newton_refine(spec, u, cfg);
            }
            if (!std::isfinite(merit)) {
                return std::nullopt;
            }
            const HessianOperator op(spec, u, cfg.hessian);
            auto dir = newton_direction(op, r);
            if (!deflation.empty()) {
                // Newton step for M r from the undeflated one (Sherman-Morrison).
                const double gd = dot(deflation.log_gradient(u), dir);
                const double tau = 1.0 / (1.0 - gd);
                if (!std::isfinite(tau)) {
                    return std::nullopt;
                }
                for (double& d : dir) {
                    d *= tau;
                }
            }
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 9; ++ls, alpha *= 0.5) {
                Field trial = step(u, dir, alpha);
                try {
                    auto rt = residual(spec, trial);
                    const double mt = deflation.factor(trial) * l2(rt);
                    if (mt < (1.0 - 1e-4 * alpha) * merit) {
                        u = std::move(trial);
                        r = std::move(rt);
                        merit = mt;
                        accepted = true;
                        break;
                    }
                } catch (const DomainError&) {
                }
            }
            if (!accepted) {
                u = step(u, dir, alpha);
                r = residual(spec, u);
                merit = deflation.factor(u) * l2(r);
            }
        }
    } catch (const Error&) {
    }
    return std::nullopt;
}

std::vector<Field> make_starts(const Grid1D& grid, const SolverConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t pairs = (cfg.n_starts + 1) / 2;
    std::vector<Field> starts;
    starts.reserve(cfg.n_starts);
    for (std::size_t j = 0; j < cfg.n_starts; ++j) {
        if (j % 2 == 1) {
            starts.push_back(-starts.back());
            continue;
        }
        Field w(grid);
        double nrm = 0.0;
        while (nrm == 0.0) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                w[i] = normal(rng);
            }
            nrm = std::sqrt(norm_sq(w));
        }
        const double radius =
            cfg.start_radius * static_cast<double>(j / 2 + 1) / static_cast<double>(pairs);
        starts.push_back((radius / nrm) * w);
    }
    return starts;
}

CriticalPointSet find_all(const ProblemSpec& spec, const SolverConfig& cfg) {
    cfg.validate();
    const std::vector<Field> starts = make_starts(spec.grid(), cfg);
    const auto count = static_cast<long long>(starts.size());
    CriticalPointSet set;

    auto merge = [&](std::vector<std::optional<CriticalPoint>>& found) {
        bool added = false;
        for (auto& c : found) {
            if (c && c->residual_norm <= cfg.newton_tol) {
                added = set.insert(std::move(*c), cfg.distinct_tol) || added;
            }
        }
        return added;
    };

    {
        std::vector<std::optional<CriticalPoint>> found(starts.size());
#pragma omp parallel for schedule(dynamic)
        for (long long j = 0; j < count; ++j) {
            const auto idx = static_cast<std::size_t>(j);
            try {
                Field u = starts[idx];
                try {
                    u = descend(spec, u, cfg);
                } catch (const DescentStall& stall) {
                    u = stall.last();
                }
                auto p = newton_refine(spec, u, cfg);
                p.origin = fmt::format("start:{}", idx);
                found[idx] = std::move(p);
            } catch (const Error&) {
            }
        }
        merge(found);
    }

    for (int round = 1; round <= cfg.max_rounds; ++round) {
        std::vector<Field> known;
        for (const auto& p : set.points()) {
            known.push_back(p.u);
        }
        const Deflation deflation(std::move(known), cfg.deflation_power, cfg.deflation_shift);
        std::vector<std::optional<CriticalPoint>> found(starts.size());
#pragma omp parallel for schedule(dynamic)
        for (long long j = 0; j < count; ++j) {
            const auto idx = static_cast<std::size_t>(j);
            auto p = deflated_newton(spec, starts[idx], deflation, cfg);
            if (p) {
                p->origin = fmt::format("deflation:{}/start:{}", round, idx);
                found[idx] = std::move(p);
            }
        }
        if (!merge(found)) {
            break;
        }
    }
    set.finalize();
    return set;
}

CriticalPointSet brute_force(const ProblemSpec& spec, const BruteForceOptions& opts,
                             const SolverConfig& cfg) {
    const std::size_t n = spec.grid().n_interior();
    const std::size_t m = opts.resolution;
    if (n > 3) {
        throw DomainError("brute_force: at most 3 unknowns");
    }
    if (m < 3 || m > 401) {
        throw DomainError("brute_force: resolution must lie in [3, 401]");
    }
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) {
        total *= m;
    }
    const double h = 2.0 * opts.box / static_cast<double>(m - 1);
    auto coords = [&](std::size_t flat) {
        std::vector<std::size_t> idx(n);
        for (std::size_t d = 0; d < n; ++d) {
            idx[d] = flat % m;
            flat /= m;
        }
        return idx;
    };
    auto field_at = [&](const std::vector<std::size_t>& idx) {
        Field u(spec.grid());
        for (std::size_t d = 0; d < n; ++d) {
            u[d] = -opts.box + h * static_cast<double>(idx[d]);
        }
        return u;
    };

    std::vector<double> rnorm(total);
    const auto total_ll = static_cast<long long>(total);
#pragma omp parallel for schedule(static)
    for (long long f = 0; f < total_ll; ++f) {
        const auto flat = static_cast<std::size_t>(f);
        rnorm[flat] = l2(residual(spec, field_at(coords(flat))));
    }

    // Local minima over the 3^N - 1 neighbours, ties broken by flat index.
    std::vector<std::size_t> minima;
    for (std::size_t flat = 0; flat < total; ++flat) {
        const auto idx = coords(flat);
        bool is_min = true;
        std::size_t neighbours = 1;
        for (std::size_t d = 0; d < n; ++d) {
            neighbours *= 3;
        }
        for (std::size_t code = 0; code < neighbours && is_min; ++code) {
            std::size_t c = code;
            std::size_t other = 0;
            std::size_t stride = 1;
            bool inside = true;
            bool self = true;
            for (std::size_t d = 0; d < n; ++d) {
                const auto off = static_cast<long long>(c % 3) - 1;
                c /= 3;
                const long long pos = static_cast<long long>(idx[d]) + off;
                if (pos < 0 || pos >= static_cast<long long>(m)) {
                    inside = false;
                    break;
                }
                self = self && off == 0;
                other += static_cast<std::size_t>(pos) * stride;
                stride *= m;
            }
            if (!inside || self) {
                continue;
            }
            if (rnorm[other] < rnorm[flat] || (rnorm[other] == rnorm[flat] && other < flat)) {
                is_min = false;
            }
        }
        if (is_min) {
            minima.push_back(flat);
        }
    }

    CriticalPointSet set;
    std::vector<std::size_t> cell_of;  // grid node each accepted point came from
    for (const std::size_t flat : minima) {
        const Field u0 = field_at(coords(flat));
        // A root within half a cell of u0 keeps |r(u0)| below |H| h sqrt(N).
        const auto dense = HessianOperator(spec, u0, cfg.hessian).assemble();
        double frob = 0.0;
        for (const double v : dense) {
            frob += v * v;
        }
        const double threshold = std::sqrt(frob) * h * std::sqrt(static_cast<double>(n));
        if (rnorm[flat] > threshold) {
            continue;
        }
        try {
            auto p = newton_refine(spec, u0, cfg);
            p.origin = fmt::format("grid:{}", flat);
            // Nearest grid node of the refined point.
            std::size_t nearest = 0;
            std::size_t stride = 1;
            for (std::size_t d = 0; d < n; ++d) {
                const double pos = std::round((p.u[d] + opts.box) / h);
                const auto clamped =
                    static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(m - 1)));
                nearest += clamped * stride;
                stride *= m;
            }
            if (set.insert(std::move(p), cfg.distinct_tol)) {
                if (std::find(cell_of.begin(), cell_of.end(), nearest) != cell_of.end()) {
                    set.add_warning(fmt::format(
                        "ResolutionWarning: distinct solutions share grid cell {}", nearest));
                }
                cell_of.push_back(nearest);
            }
        } catch (const Error&) {
        }
    }
    set.finalize();
    return set;
}

}  // namespace kirchhoff
