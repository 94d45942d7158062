#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mct/dfe/stability.hpp"
#include "mct/pareto/synthetic.hpp"

namespace mct::exp {

// Randomized property suites behind `mctrain verify`. Each function is a pure
// function of (trials, seed).

// Label perturbations of random sigmoid networks on random 50-sample sets,
// Euclidean d^Y. A quarter of the trials put the whole perturbation on one sample.
std::vector<dfe::StabilityReport> label_stability_trials(std::size_t trials, std::uint64_t seed);

// Input perturbations of linear models f(x) = lambda . x with K = ||lambda||.
std::vector<dfe::StabilityReport> input_stability_trials(std::size_t trials, std::uint64_t seed);

// The quadratic instance with z0 = (0, 0), z = (0.2, 0.2), equal weights,
// h = 1, alpha = 2, m = 4, delta = 1 on a 2001-point grid of [-1, 1].
pareto::SyntheticProblem worked_estimation_instance();

// Random quadratic instances: 2..4 criteria, random positive weights, z and z0
// uniform in [-1, 1], h = 0.5, alpha = 2, m = 4, delta = 1, 2001-point grid.
std::vector<pareto::BoundReport> estimation_trials(std::size_t trials, std::uint64_t seed);

struct ConvergenceTrial {
    pareto::ConvergenceReport report;
    double c = 0.0;
};

// Quadratic family on a 101-point grid of [-1, 1] with z^n = z0 + (c/n) d,
// n = 1..64. Trial 0 uses a constant schedule (c = 0).
std::vector<ConvergenceTrial> convergence_trials(std::size_t trials, std::uint64_t seed);

struct ScalarizationTrial {
    std::size_t dim = 0;
    std::size_t points = 0;
    bool positive_in_efficient = true;     // argmin(beta > 0) subset of Eff
    bool nonnegative_in_weak = true;       // argmin(beta >= 0) subset of WEff
    bool efficient_in_weak = true;         // Eff subset of WEff
    bool proper_in_efficient = true;       // PEff_C subset of Eff
    bool ok() const { return positive_in_efficient && nonnegative_in_weak && efficient_in_weak && proper_in_efficient; }
};

// `trials` random point sets for each dimension in `dims`.
std::vector<ScalarizationTrial> scalarization_trials(std::size_t trials, std::uint64_t seed,
                                                     const std::vector<std::size_t>& dims = {2, 3, 4});

struct GradientTrial {
    std::string arch;
    std::string metric;
    std::size_t parameters = 0;
    double max_relative_error = 0.0;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

// Backprop vs central differences on small random networks, cycling through
// both architectures and the three training metrics. Relative error of
// component k is |g_k - fd_k| / max(|g_k|, |fd_k|, 1e-6).
std::vector<GradientTrial> gradient_trials(std::size_t trials, std::uint64_t seed);

struct SuiteResult {
    std::string name;
    std::size_t trials = 0;
    std::size_t violations = 0;   // bound violations among certified instances
    std::size_t uncertified = 0;  // instances whose hypotheses did not certify
    std::string csv;
    std::string summary;

    int exit_code() const { return violations == 0 ? 0 : 1; }
};

// suite: prop1 | prop2 | estimation | convergence | scalarization | gradient
SuiteResult run_suite(std::string_view suite, std::size_t trials, std::uint64_t seed);

const std::vector<std::string>& suite_names();

}  // namespace mct::exp
