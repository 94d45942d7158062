#include "mct/pareto/synthetic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mct/rng.hpp"
#include "mct/text.hpp"

namespace mct::pareto {
namespace {

constexpr double kCertifySlack = 1e-9;

Eigen::VectorXd axis(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw ArgumentError("Grid: need n >= 2 and hi > lo");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    const double steps = static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double kd = static_cast<double>(k);
        v(static_cast<Eigen::Index>(k)) = (lo * (steps - kd) + hi * kd) / steps;
    }
    return v;
}

IndexSet all_indices(std::size_t n) {
    IndexSet out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
}

IndexSet within(const Grid& grid, const IndexSet& candidates, const Eigen::VectorXd& center, double radius) {
    IndexSet out;
    for (const auto i : candidates)
        if ((grid.points.row(static_cast<Eigen::Index>(i)).transpose() - center).norm() <= radius) out.push_back(i);
    return out;
}

// Restriction of `values` to `subset`, argmin indices mapped back to grid indices.
IndexSet argmin_on(const Eigen::VectorXd& values, const IndexSet& subset) {
    Eigen::VectorXd restricted(static_cast<Eigen::Index>(subset.size()));
    for (std::size_t i = 0; i < subset.size(); ++i) restricted(static_cast<Eigen::Index>(i)) = values(static_cast<Eigen::Index>(subset[i]));
    IndexSet out;
    for (const auto local : grid_argmin(restricted)) out.push_back(subset[local]);
    return out;
}

double isolation_on(const SyntheticProblem& problem, const Eigen::VectorXd& values, const IndexSet& subset,
                    double alpha, double exclusion_radius) {
    const IndexSet minimizers = argmin_on(values, subset);
    if (minimizers.size() != 1) {
        throw std::runtime_error("isolated_minimizer_constant: grid minimizer is not unique (" +
                                 std::to_string(minimizers.size()) +
                                 " tied grid points); the grid is too coarse to certify isolation");
    }
    const auto i0 = static_cast<Eigen::Index>(minimizers.front());
    const Eigen::VectorXd lambda0 = problem.grid.points.row(i0).transpose();
    double h = std::numeric_limits<double>::infinity();
    for (const auto i : subset) {
        const auto row = static_cast<Eigen::Index>(i);
        if (row == i0) continue;
        const double dist = (problem.grid.points.row(row).transpose() - lambda0).norm();
        if (dist <= exclusion_radius) continue;
        h = std::min(h, (values(row) - values(i0)) / std::pow(dist, alpha));
    }
    if (!std::isfinite(h)) throw ArgumentError("isolated_minimizer_constant: no grid point outside the exclusion radius");
    return h;
}

}  // namespace

Grid Grid::box1d(double lo, double hi, std::size_t n) {
    Grid g;
    g.points = axis(lo, hi, n);
    g.spacing = (hi - lo) / static_cast<double>(n - 1);
    return g;
}

Grid Grid::box2d(double lo, double hi, std::size_t n_per_axis) {
    const Eigen::VectorXd a = axis(lo, hi, n_per_axis);
    Grid g;
    g.points.resize(a.size() * a.size(), 2);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < a.size(); ++j) g.points.row(i * a.size() + j) << a(i), a(j);
    g.spacing = (hi - lo) / static_cast<double>(n_per_axis - 1);
    return g;
}

void SyntheticProblem::validate() const {
    if (grid.size() == 0) throw ArgumentError("SyntheticProblem: empty grid");
    if (z0.empty() || z.size() != z0.size()) throw ArgumentError("SyntheticProblem: z and z0 must have the same nonzero length");
    if (criteria.size() != 1 && criteria.size() != z0.size())
        throw ArgumentError("SyntheticProblem: need one criterion per data point or a single shared one");
    if (betas.size() != static_cast<Eigen::Index>(z0.size())) throw ArgumentError("SyntheticProblem: one beta per criterion");
    if ((betas.array() <= 0.0).any() || std::abs(betas.sum() - 1.0) > 1e-12)
        throw ArgumentError("SyntheticProblem: betas must be positive and sum to 1");
    if (!(holder_delta > 0 && holder_m > 0 && iso_alpha > 0 && iso_h > 0))
        throw ArgumentError("SyntheticProblem: delta, m, alpha and h must be positive");
}

SyntheticProblem SyntheticProblem::quadratic(Grid grid, std::vector<Eigen::VectorXd> z, std::vector<Eigen::VectorXd> z0,
                                             Eigen::VectorXd betas) {
    SyntheticProblem p;
    p.grid = std::move(grid);
    p.criteria = {[](const Eigen::VectorXd& lambda, const Eigen::VectorXd& zi) { return (lambda - zi).squaredNorm(); }};
    p.z = std::move(z);
    p.z0 = std::move(z0);
    p.betas = std::move(betas);
    return p;
}

Eigen::MatrixXd criteria_values(const SyntheticProblem& problem, std::span<const Eigen::VectorXd> data) {
    Eigen::MatrixXd out(problem.grid.points.rows(), static_cast<Eigen::Index>(data.size()));
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const Eigen::VectorXd lambda = problem.grid.points.row(r).transpose();
        for (std::size_t i = 0; i < data.size(); ++i)
            out(r, static_cast<Eigen::Index>(i)) = problem.criterion(i)(lambda, data[i]);
    }
    return out;
}

Eigen::VectorXd scalarized_values(const SyntheticProblem& problem, DataSide side) {
    return criteria_values(problem, problem.data(side)) * problem.betas;
}

IndexSet grid_argmin(const Eigen::VectorXd& values) {
    if (values.size() == 0) throw ArgumentError("grid_argmin: no values");
    const double best = values.minCoeff();
    const double tol = kArgminRelTolerance * std::max(1.0, std::abs(best));
    IndexSet out;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (values(i) <= best + tol) out.push_back(static_cast<std::size_t>(i));
    return out;
}

double isolated_minimizer_constant(const SyntheticProblem& problem, DataSide side, double alpha, double exclusion_radius,
                                   std::optional<double> neighborhood) {
    if (!(alpha > 0.0)) throw ArgumentError("isolated_minimizer_constant: alpha must be positive");
    const Eigen::VectorXd values = scalarized_values(problem, side);
    IndexSet subset = all_indices(problem.grid.size());
    if (neighborhood) {
        const auto center = static_cast<Eigen::Index>(grid_argmin(values).front());
        subset = within(problem.grid, subset, problem.grid.points.row(center).transpose(), *neighborhood);
    }
    return isolation_on(problem, values, subset, alpha, exclusion_radius);
}

double holder_constant(const SyntheticProblem& problem, double delta, const IndexSet& lambda_subset) {
    if (!(delta > 0.0)) throw ArgumentError("holder_constant: delta must be positive");
    const IndexSet subset = lambda_subset.empty() ? all_indices(problem.grid.size()) : lambda_subset;
    const Eigen::Index zdim = problem.z0.front().size();
    const std::size_t distinct = problem.criteria.size();
    Xoshiro256 rng(derive_seed(problem.seed, 7));
    double best = 0.0;
    std::size_t usable = 0;
    Eigen::VectorXd z1(zdim), z2(zdim);
    for (std::size_t s = 0; s < problem.holder_samples; ++s) {
        const auto row = static_cast<Eigen::Index>(subset[rng.below(subset.size())]);
        const Eigen::VectorXd lambda = problem.grid.points.row(row).transpose();
        for (Eigen::Index k = 0; k < zdim; ++k) z1(k) = rng.uniform(problem.z_lo, problem.z_hi);
        for (Eigen::Index k = 0; k < zdim; ++k) z2(k) = rng.uniform(problem.z_lo, problem.z_hi);
        const double dz = (z1 - z2).norm();
        if (dz == 0.0) continue;
        ++usable;
        const double scale = std::pow(dz, delta);
        for (std::size_t i = 0; i < distinct; ++i) {
            const auto& g = problem.criteria[i];
            best = std::max(best, std::abs(g(lambda, z1) - g(lambda, z2)) / scale);
        }
    }
    if (usable == 0) throw ArgumentError("holder_constant: every sampled pair was coincident");
    return best;
}

std::string_view to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::holds: return "holds";
        case BoundStatus::violated: return "violated";
        case BoundStatus::hypotheses_not_met: return "hypotheses-not-met";
    }
    return "unknown";
}

BoundReport verify_estimation_bound(const SyntheticProblem& problem, std::optional<double> local_neighborhood) {
    problem.validate();
    BoundReport report;
    report.tolerance = 2.0 * problem.grid.spacing;

    const Eigen::VectorXd l0 = scalarized_values(problem, DataSide::z0);
    const Eigen::VectorXd lz = scalarized_values(problem, DataSide::z);
    IndexSet subset = all_indices(problem.grid.size());
    if (local_neighborhood) {
        if (!(*local_neighborhood > 0.0)) throw ArgumentError("verify_estimation_bound: neighborhood radius must be positive");
        const auto center = static_cast<Eigen::Index>(grid_argmin(l0).front());
        subset = within(problem.grid, subset, problem.grid.points.row(center).transpose(), *local_neighborhood);
    }

    bool certified = true;
    try {
        report.h_star = isolation_on(problem, l0, subset, problem.iso_alpha, report.tolerance);
    } catch (const std::runtime_error&) {
        report.h_star = 0.0;
        certified = false;
    }
    report.m_star = holder_constant(problem, problem.holder_delta, subset);
    certified = certified && report.h_star >= problem.iso_h * (1.0 - kCertifySlack) &&
                report.m_star <= problem.holder_m * (1.0 + kCertifySlack);

    const IndexSet s_z = argmin_on(lz, subset);
    const IndexSet s_z0 = argmin_on(l0, subset);
    report.argmin_count_z = s_z.size();
    report.argmin_count_z0 = s_z0.size();
    report.minimizer_z = problem.grid.points.row(static_cast<Eigen::Index>(s_z.front())).transpose();
    report.minimizer_z0 = problem.grid.points.row(static_cast<Eigen::Index>(s_z0.front())).transpose();
    report.excess = excess(select_rows(problem.grid.points, s_z), select_rows(problem.grid.points, s_z0));

    double data_shift = 0.0;
    for (std::size_t i = 0; i < problem.z0.size(); ++i)
        data_shift += std::pow((problem.z[i] - problem.z0[i]).norm(), problem.holder_delta);
    const double inv_alpha = 1.0 / problem.iso_alpha;
    report.bound = std::pow(2.0 * problem.holder_m / problem.iso_h, inv_alpha) * std::pow(data_shift, inv_alpha);

    if (!certified) {
        report.status = BoundStatus::hypotheses_not_met;
    } else {
        report.status = report.excess <= report.bound + report.tolerance ? BoundStatus::holds : BoundStatus::violated;
    }
    return report;
}

ConvergenceReport verify_convergence(const SyntheticProblem& problem, const ConvergenceSchedule& schedule) {
    problem.validate();
    if (schedule.direction.size() != problem.z0.size())
        throw ArgumentError("verify_convergence: need one direction per criterion");
    if (schedule.n_max == 0) throw ArgumentError("verify_convergence: n_max must be >= 1");
    const DilatedCone cone(schedule.rho);

    const Eigen::MatrixXd reference = criteria_values(problem, problem.z0);
    const Eigen::MatrixXd weff = select_rows(problem.grid.points, weakly_efficient_set(reference));
    const Eigen::MatrixXd eff = select_rows(problem.grid.points, efficient_set(reference));
    if (weff.rows() == 0) throw std::logic_error("verify_convergence: empty weakly efficient set on a finite grid");

    ConvergenceReport report;
    report.tolerance = 2.0 * problem.grid.spacing;
    std::vector<Eigen::VectorXd> zn(problem.z0.size());
    for (std::size_t n = 1; n <= schedule.n_max; ++n) {
        const double step = schedule.c / static_cast<double>(n);
        for (std::size_t i = 0; i < zn.size(); ++i) zn[i] = problem.z0[i] + step * schedule.direction[i];
        const Eigen::MatrixXd values = criteria_values(problem, zn);
        const IndexSet weak_n = weakly_efficient_set(values);
        const IndexSet proper_n = properly_efficient_set(values, cone);

        ConvergenceStep s;
        s.n = n;
        s.weak_count = weak_n.size();
        s.proper_count = proper_n.size();
        s.weak_distance = excess(select_rows(problem.grid.points, weak_n), weff);
        s.proper_distance = proper_n.empty() ? 0.0 : excess(select_rows(problem.grid.points, proper_n), eff);
        if (!report.steps.empty()) {
            const auto& prev = report.steps.back();
            report.monotone = report.monotone && s.weak_distance <= prev.weak_distance + 1e-12 &&
                              s.proper_distance <= prev.proper_distance + 1e-12;
        }
        report.steps.push_back(s);
    }
    const auto& last = report.steps.back();
    report.converged = last.weak_distance <= report.tolerance && last.proper_distance <= report.tolerance;
    return report;
}

void write_bound_csv(std::ostream& out, std::span<const BoundReport> reports) {
    out << "instance,excess,bound,holds\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto holds = reports[i].holds();
        out << i << ',' << format_double(reports[i].excess) << ',' << format_double(reports[i].bound) << ','
            << (holds ? (*holds ? "true" : "false") : "n/a") << '\n';
    }
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
    out << "n,weak_distance,proper_distance,weak_count,proper_count\n";
    for (const auto& s : report.steps) {
        out << s.n << ',' << format_double(s.weak_distance) << ',' << format_double(s.proper_distance) << ','
            << s.weak_count << ',' << s.proper_count << '\n';
    }
}

}  // namespace mct::pareto
