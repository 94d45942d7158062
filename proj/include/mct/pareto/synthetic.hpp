#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mct/pareto/efficiency.hpp"

// Grid-resolution checks of the set-valued stability results for vector
// data-fitting problems: isolated minimizers, Hoelder continuity in the data,
// the excess bound between scalarized argmin sets and convergence of
// (weakly / properly) efficient sets under vanishing data perturbations.

namespace mct::pareto {

// Finite sample of a box Lambda. One point per row.
struct Grid {
    Eigen::MatrixXd points;
    double spacing = 0.0;  // largest axis step

    static Grid box1d(double lo, double hi, std::size_t n);
    static Grid box2d(double lo, double hi, std::size_t n_per_axis);

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

// g_i(lambda, z_i): the i-th criterion evaluated at parameter lambda with data z_i.
using Criterion = std::function<double(const Eigen::VectorXd& lambda, const Eigen::VectorXd& z)>;

enum class DataSide { z, z0 };

struct SyntheticProblem {
    Grid grid;
    std::vector<Criterion> criteria;  // one per data point, or one shared by all
    std::vector<Eigen::VectorXd> z;   // perturbed data
    std::vector<Eigen::VectorXd> z0;  // reference data
    Eigen::VectorXd betas;            // positive, sum 1

    double holder_delta = 1.0;
    double holder_m = 4.0;
    double iso_alpha = 2.0;
    double iso_h = 1.0;

    // Box of Z sampled by holder_constant.
    double z_lo = -1.0;
    double z_hi = 1.0;
    std::size_t holder_samples = 20000;
    std::uint64_t seed = 0;

    std::size_t criteria_count() const { return z0.size(); }
    const Criterion& criterion(std::size_t i) const { return criteria.size() == 1 ? criteria[0] : criteria[i]; }
    const std::vector<Eigen::VectorXd>& data(DataSide side) const { return side == DataSide::z ? z : z0; }

    // Throws ArgumentError when the invariants do not hold.
    void validate() const;

    // g_i(lambda, z_i) = ||lambda - z_i||^2 on Lambda = [-1,1]^dim. With equal
    // weights and m = 4, h = 1, alpha = 2, delta = 1 this is the worked case.
    static SyntheticProblem quadratic(Grid grid, std::vector<Eigen::VectorXd> z, std::vector<Eigen::VectorXd> z0,
                                      Eigen::VectorXd betas);
};

// l(lambda, z) = sum_i beta_i g_i(lambda, z_i) at every grid point.
Eigen::VectorXd scalarized_values(const SyntheticProblem& problem, DataSide side);

// J(lambda) = (g_1(lambda, z_1), ..., g_N(lambda, z_N)) at every grid point (rows).
Eigen::MatrixXd criteria_values(const SyntheticProblem& problem, std::span<const Eigen::VectorXd> data);

// All grid indices attaining the minimum of `values` (relative tie tolerance 1e-12).
IndexSet grid_argmin(const Eigen::VectorXd& values);

// h* = min over grid lambda != lambda0 with ||lambda - lambda0|| > exclusion_radius
// of (l(lambda) - l(lambda0)) / ||lambda - lambda0||^alpha, lambda0 the grid
// minimizer of l(., side). With `neighborhood`, only grid points within that
// radius of lambda0 are considered. Throws ArgumentError on alpha <= 0 and
// std::runtime_error when the grid minimizer is not unique.
double isolated_minimizer_constant(const SyntheticProblem& problem, DataSide side, double alpha,
                                   double exclusion_radius = 0.0,
                                   std::optional<double> neighborhood = std::nullopt);

// m* = max over sampled (lambda, z1, z2) and criteria i of
// |g_i(lambda, z1) - g_i(lambda, z2)| / ||z1 - z2||^delta. lambda is drawn from
// the grid (or from `lambda_subset` when non-empty), z1, z2 uniformly from the Z box.
double holder_constant(const SyntheticProblem& problem, double delta, const IndexSet& lambda_subset = {});

enum class BoundStatus { holds, violated, hypotheses_not_met };

std::string_view to_string(BoundStatus s);

struct BoundReport {
    double excess = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;  // 2 x grid spacing
    BoundStatus status = BoundStatus::hypotheses_not_met;
    double h_star = 0.0;  // certified isolation constant at grid resolution
    double m_star = 0.0;  // sampled Hoelder constant
    Eigen::VectorXd minimizer_z;
    Eigen::VectorXd minimizer_z0;
    std::size_t argmin_count_z = 0;
    std::size_t argmin_count_z0 = 0;

    // Only meaningful when the hypotheses certified.
    std::optional<bool> holds() const {
        if (status == BoundStatus::hypotheses_not_met) return std::nullopt;
        return status == BoundStatus::holds;
    }
};

// Excess e(S_z, S_z0) of the grid argmin sets of l(., z) and l(., z0) against
// (2m/h)^{1/alpha} (sum_i ||z_i - z0_i||^delta)^{1/alpha}. Hypotheses are
// certified first: isolation h* >= h (ignoring grid points within the grid
// tolerance of the minimizer) and sampled Hoelder m* <= m. With
// `local_neighborhood`, Lambda is restricted to grid points within that radius
// of the z0 minimizer (the local form of the statement).
BoundReport verify_estimation_bound(const SyntheticProblem& problem,
                                    std::optional<double> local_neighborhood = std::nullopt);

struct ConvergenceStep {
    std::size_t n = 0;
    double weak_distance = 0.0;    // e(WEff(DFE_n), WEff(DFE))
    double proper_distance = 0.0;  // e(PEff_C(DFE_n), Eff(DFE)), 0 if PEff_C is empty
    std::size_t weak_count = 0;
    std::size_t proper_count = 0;
};

struct ConvergenceReport {
    std::vector<ConvergenceStep> steps;
    double tolerance = 0.0;  // 2 x grid spacing
    bool monotone = true;    // both distance sequences non-increasing
    bool converged = false;  // final distances within tolerance
};

struct ConvergenceSchedule {
    std::vector<Eigen::VectorXd> direction;  // one per criterion; z^n_i = z0_i + (c/n) direction_i
    double c = 1.0;
    std::size_t n_max = 64;
    double rho = 0.1;  // dilation of the cone used for PEff_C
};

ConvergenceReport verify_convergence(const SyntheticProblem& problem, const ConvergenceSchedule& schedule);

// CSV: instance,excess,bound,holds (holds is "n/a" when hypotheses fail).
void write_bound_csv(std::ostream& out, std::span<const BoundReport> reports);
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);

}  // namespace mct::pareto
