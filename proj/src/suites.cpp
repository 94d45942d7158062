#include "mct/exp/suites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "mct/nn/train.hpp"
#include "mct/pareto/efficiency.hpp"
#include "mct/rng.hpp"
#include "mct/text.hpp"

namespace mct::exp {
namespace {

constexpr std::size_t kSamples = 50;
constexpr double kGradientTolerance = 1e-5;

std::size_t pick(Xoshiro256& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

RowMatrix uniform_matrix(Xoshiro256& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
    RowMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

RowMatrix normal_matrix(Xoshiro256& rng, Eigen::Index rows, Eigen::Index cols, double sd) {
    RowMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, sd);
    return m;
}

Eigen::VectorXd random_betas(Xoshiro256& rng, std::size_t n) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (auto& v : b) v = rng.uniform(0.05, 1.0);
    return b / b.sum();
}

RowMatrix one_hot(Xoshiro256& rng, Eigen::Index rows, Eigen::Index classes) {
    RowMatrix m = RowMatrix::Zero(rows, classes);
    for (Eigen::Index i = 0; i < rows; ++i) m(i, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(classes)))) = 1.0;
    return m;
}

std::vector<Eigen::VectorXd> scalars(Xoshiro256& rng, std::size_t n, double lo, double hi) {
    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(Eigen::VectorXd::Constant(1, rng.uniform(lo, hi)));
    return out;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

std::vector<dfe::StabilityReport> label_stability_trials(std::size_t trials, std::uint64_t seed) {
    std::vector<dfe::StabilityReport> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Xoshiro256 rng(derive_seed(seed, t));
        const std::size_t d = pick(rng, 2, 6), h = pick(rng, 3, 8), k = pick(rng, 1, 4);
        const auto net = nn::init_network(nn::Architecture::mlp, {d, h, k}, rng());
        const RowMatrix inputs = uniform_matrix(rng, kSamples, static_cast<Eigen::Index>(d), 0.0, 1.0);
        const RowMatrix outputs = net.forward(inputs);
        const RowMatrix labels = uniform_matrix(rng, kSamples, static_cast<Eigen::Index>(k), 0.0, 1.0);
        RowMatrix perturbed = labels;
        if (t % 4 == 3) {
            const auto row = static_cast<Eigen::Index>(rng.below(kSamples));
            perturbed.row(row) += normal_matrix(rng, 1, static_cast<Eigen::Index>(k), rng.uniform(0.5, 3.0));
        } else {
            perturbed += normal_matrix(rng, kSamples, static_cast<Eigen::Index>(k), rng.uniform(1e-4, 0.5));
        }
        out.push_back(dfe::verify_label_stability(outputs, labels, perturbed, dfe::Metric::euclidean));
    }
    return out;
}

std::vector<dfe::StabilityReport> input_stability_trials(std::size_t trials, std::uint64_t seed) {
    std::vector<dfe::StabilityReport> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Xoshiro256 rng(derive_seed(seed, t));
        const auto d = static_cast<Eigen::Index>(pick(rng, 1, 8));
        dfe::LinearModel model{normal_matrix(rng, d, 1, rng.uniform(0.1, 3.0)).col(0)};
        const RowMatrix inputs = normal_matrix(rng, kSamples, d, 1.0);
        const RowMatrix labels = normal_matrix(rng, kSamples, 1, 2.0);
        const RowMatrix perturbed = inputs + normal_matrix(rng, kSamples, d, rng.uniform(1e-4, 1.0));
        out.push_back(dfe::verify_input_stability(model, inputs, labels, perturbed, dfe::Metric::euclidean,
                                                  dfe::LipschitzSource::supplied(model.lipschitz())));
    }
    return out;
}

pareto::SyntheticProblem worked_estimation_instance() {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    const Eigen::VectorXd shifted = Eigen::VectorXd::Constant(1, 0.2);
    return pareto::SyntheticProblem::quadratic(pareto::Grid::box1d(-1.0, 1.0, 2001), {shifted, shifted}, {zero, zero},
                                               Eigen::VectorXd::Constant(2, 0.5));
}

std::vector<pareto::BoundReport> estimation_trials(std::size_t trials, std::uint64_t seed) {
    const auto grid = pareto::Grid::box1d(-1.0, 1.0, 2001);
    std::vector<pareto::BoundReport> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Xoshiro256 rng(derive_seed(seed, t));
        const std::size_t n = pick(rng, 2, 4);
        auto z = scalars(rng, n, -1.0, 1.0);
        auto z0 = scalars(rng, n, -1.0, 1.0);
        auto problem = pareto::SyntheticProblem::quadratic(grid, std::move(z), std::move(z0), random_betas(rng, n));
        // The grid minimizer sits up to half a step from the true one, which
        // costs up to a third of h outside the exclusion radius.
        problem.iso_h = 0.5;
        problem.seed = rng();
        out.push_back(pareto::verify_estimation_bound(problem));
    }
    return out;
}

std::vector<ConvergenceTrial> convergence_trials(std::size_t trials, std::uint64_t seed) {
    const auto grid = pareto::Grid::box1d(-1.0, 1.0, 101);
    std::vector<ConvergenceTrial> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Xoshiro256 rng(derive_seed(seed, t));
        const std::size_t n = pick(rng, 2, 3);
        auto z0 = scalars(rng, n, -0.8, 0.8);
        auto problem = pareto::SyntheticProblem::quadratic(grid, z0, z0, random_betas(rng, n));
        pareto::ConvergenceSchedule schedule;
        schedule.direction = scalars(rng, n, -1.0, 1.0);
        schedule.c = t == 0 ? 0.0 : 1.0 - rng.uniform();
        out.push_back({pareto::verify_convergence(problem, schedule), schedule.c});
    }
    return out;
}

std::vector<ScalarizationTrial> scalarization_trials(std::size_t trials, std::uint64_t seed,
                                                     const std::vector<std::size_t>& dims) {
    std::vector<ScalarizationTrial> out;
    out.reserve(trials * dims.size());
    for (std::size_t di = 0; di < dims.size(); ++di) {
        const auto p = static_cast<Eigen::Index>(dims[di]);
        for (std::size_t t = 0; t < trials; ++t) {
            Xoshiro256 rng(derive_seed(derive_seed(seed, dims[di]), t));
            const auto count = static_cast<Eigen::Index>(pick(rng, 5, 40));
            Eigen::MatrixXd points(count, p);
            // Small integer coordinates make ties and duplicates common.
            const bool integer = t % 2 == 0;
            for (auto& v : points.reshaped()) v = integer ? static_cast<double>(rng.below(10)) : rng.uniform(0.0, 10.0);

            Eigen::VectorXd positive(p), nonnegative(p);
            for (Eigen::Index k = 0; k < p; ++k) {
                positive(k) = rng.uniform(0.05, 1.0);
                nonnegative(k) = rng.uniform() < 0.4 ? 0.0 : rng.uniform(0.05, 1.0);
            }
            if (nonnegative.isZero(0.0)) nonnegative(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p)))) = 1.0;

            const auto eff = pareto::efficient_set(points);
            const auto weak = pareto::weakly_efficient_set(points);
            const auto proper = pareto::properly_efficient_set(points, pareto::DilatedCone(0.1));
            ScalarizationTrial trial;
            trial.dim = dims[di];
            trial.points = static_cast<std::size_t>(count);
            trial.positive_in_efficient = pareto::is_subset(pareto::scalarization_argmin(points, positive), eff);
            trial.nonnegative_in_weak = pareto::is_subset(pareto::scalarization_argmin(points, nonnegative), weak);
            trial.efficient_in_weak = pareto::is_subset(eff, weak);
            trial.proper_in_efficient = pareto::is_subset(proper, eff);
            out.push_back(trial);
        }
    }
    return out;
}

std::vector<GradientTrial> gradient_trials(std::size_t trials, std::uint64_t seed) {
    static constexpr std::array metrics{dfe::Metric::squared_error, dfe::Metric::logistic,
                                        dfe::Metric::binary_cross_entropy};
    std::vector<GradientTrial> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Xoshiro256 rng(derive_seed(seed, t));
        const auto arch = t % 2 == 0 ? nn::Architecture::mlp : nn::Architecture::residual;
        const auto metric = metrics[(t / 2) % metrics.size()];
        const std::size_t d = pick(rng, 2, 5), h = pick(rng, 2, 4), k = pick(rng, 2, 3);
        std::vector<std::size_t> dims{d, h, k};
        if (arch == nn::Architecture::residual) dims = {d, h, h, k};
        const auto mode = rng.below(2) == 0 ? nn::ShortcutMode::pre_activation : nn::ShortcutMode::post_activation;
        auto net = nn::init_network(arch, dims, rng(), mode);
        // Zero biases put ReLU pre-activations exactly on the kink whenever a
        // whole layer below is dead; random biases keep lambda differentiable.
        for (auto& layer : net.layers())
            for (auto& b : layer.bias) b = rng.uniform(-0.5, 0.5);

        std::vector<nn::Batch> batches;
        for (int b = 0; b < 2; ++b) {
            const auto rows = static_cast<Eigen::Index>(pick(rng, 3, 6));
            batches.push_back({uniform_matrix(rng, rows, static_cast<Eigen::Index>(d), 0.0, 1.0),
                               one_hot(rng, rows, static_cast<Eigen::Index>(k))});
        }
        const dfe::ScalarizationWeights weights(random_betas(rng, batches.size()));

        const auto analytic = nn::loss_and_grad(net, batches, metric, weights).gradient;
        const VectorXd lambda = net.parameters();
        double worst = 0.0;
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            VectorXd probe = lambda;
            probe(i) = lambda(i) + kFiniteDifferenceStep;
            net.set_parameters(probe);
            const double up = nn::loss_and_grad(net, batches, metric, weights).loss;
            probe(i) = lambda(i) - kFiniteDifferenceStep;
            net.set_parameters(probe);
            const double down = nn::loss_and_grad(net, batches, metric, weights).loss;
            const double fd = (up - down) / (2.0 * kFiniteDifferenceStep);
            const double g = analytic(i);
            worst = std::max(worst, std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-6}));
        }
        out.push_back({std::string(nn::to_string(arch)), std::string(dfe::to_string(metric)),
                       static_cast<std::size_t>(lambda.size()), worst});
    }
    return out;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"prop1", "prop2", "estimation", "convergence", "scalarization", "gradient"};
    return names;
}

SuiteResult run_suite(std::string_view suite, std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw ArgumentError("verify: trials must be >= 1");
    SuiteResult r;
    r.name = std::string(suite);
    std::ostringstream csv;
    std::ostringstream summary;

    if (suite == "prop1" || suite == "prop2") {
        const auto reports = suite == "prop1" ? label_stability_trials(trials, seed) : input_stability_trials(trials, seed);
        dfe::write_stability_csv(csv, reports);
        r.trials = reports.size();
        r.violations = static_cast<std::size_t>(std::count_if(reports.begin(), reports.end(), [](const auto& x) { return !x.holds; }));
        summary << dfe::stability_summary(reports) << '\n';
    } else if (suite == "estimation") {
        const auto reports = estimation_trials(trials, seed);
        pareto::write_bound_csv(csv, reports);
        r.trials = reports.size();
        for (const auto& rep : reports) {
            if (rep.status == pareto::BoundStatus::violated) ++r.violations;
            if (rep.status == pareto::BoundStatus::hypotheses_not_met) ++r.uncertified;
        }
        const auto worked = pareto::verify_estimation_bound(worked_estimation_instance());
        summary << "worked instance: excess " << format_fixed(worked.excess, 4) << ", bound "
                << format_fixed(worked.bound, 4) << ", " << pareto::to_string(worked.status) << '\n';
    } else if (suite == "convergence") {
        const auto runs = convergence_trials(trials, seed);
        csv << "trial,c,final_weak_distance,final_proper_distance,tolerance,monotone,converged\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& rep = runs[i].report;
            const auto& last = rep.steps.back();
            csv << i << ',' << format_double(runs[i].c) << ',' << format_double(last.weak_distance) << ','
                << format_double(last.proper_distance) << ',' << format_double(rep.tolerance) << ','
                << yes_no(rep.monotone) << ',' << yes_no(rep.converged) << '\n';
            if (!rep.converged) ++r.violations;
        }
        r.trials = runs.size();
        const auto monotone = std::count_if(runs.begin(), runs.end(), [](const auto& x) { return x.report.monotone; });
        summary << monotone << " of " << runs.size() << " distance sequences non-increasing\n";
    } else if (suite == "scalarization") {
        const auto runs = scalarization_trials(trials, seed);
        csv << "trial,dim,points,positive_in_efficient,nonnegative_in_weak,efficient_in_weak,proper_in_efficient\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& s = runs[i];
            csv << i << ',' << s.dim << ',' << s.points << ',' << yes_no(s.positive_in_efficient) << ','
                << yes_no(s.nonnegative_in_weak) << ',' << yes_no(s.efficient_in_weak) << ','
                << yes_no(s.proper_in_efficient) << '\n';
            if (!s.ok()) ++r.violations;
        }
        r.trials = runs.size();
    } else if (suite == "gradient") {
        const auto runs = gradient_trials(trials, seed);
        csv << "trial,arch,metric,parameters,max_relative_error,holds\n";
        double worst = 0.0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& g = runs[i];
            const bool ok = g.max_relative_error < kGradientTolerance;
            csv << i << ',' << g.arch << ',' << g.metric << ',' << g.parameters << ','
                << format_double(g.max_relative_error) << ',' << yes_no(ok) << '\n';
            if (!ok) ++r.violations;
            worst = std::max(worst, g.max_relative_error);
        }
        r.trials = runs.size();
        summary << "max relative error " << format_double(worst) << '\n';
    } else {
        std::string names;
        for (const auto& n : suite_names()) names += (names.empty() ? "" : ", ") + n;
        throw ArgumentError("unknown suite '" + std::string(suite) + "' (expected one of: " + names + ")");
    }

    r.csv = csv.str();
    std::ostringstream head;
    head << r.name << ": " << r.trials << " trials, " << r.violations << " violations";
    if (r.uncertified) head << ", " << r.uncertified << " uncertified";
    head << '\n';
    r.summary = head.str() + summary.str();
    return r;
}

}  // namespace mct::exp
