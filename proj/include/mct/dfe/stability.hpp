#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "mct/dfe/dfe.hpp"
#include "mct/rng.hpp"
#include "mct/types.hpp"

namespace mct::dfe {

// Outcome of comparing ||DFE - DFE~||_2 against a perturbation bound.
struct StabilityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
    // Lipschitz constant used for input perturbations; 0 for label perturbations.
    double lipschitz = 0.0;
    // True when `lipschitz` came from sampled difference quotients and is
    // therefore estimated, not certified.
    bool lipschitz_estimated = false;
    VectorXd deviation;  // |DFE_i - DFE~_i|
    VectorXd bound;      // per-sample bound term (d^Y(y_i, y~_i) or K d^X(x_i, x~_i))
};

inline constexpr double kStabilitySlack = 1e-9;

// sqrt(sum_i d^Y(y_i, y~_i)^2), d^Y given by `metric` applied row-wise.
template <typename DerivedA, typename DerivedB>
double label_stability_bound(const Eigen::MatrixBase<DerivedA>& labels,
                             const Eigen::MatrixBase<DerivedB>& perturbed, Metric metric) {
    if (labels.rows() != perturbed.rows() || labels.cols() != perturbed.cols())
        throw ArgumentError("label_stability_bound: label matrices differ in shape");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < labels.rows(); ++i) {
        const double d = per_sample_loss(metric, labels.row(i), perturbed.row(i));
        sum += d * d;
    }
    return std::sqrt(sum);
}

// Label perturbation: the model outputs are fixed, only y moves. Requires a
// distance metric (the bound rests on the triangle inequality).
template <typename DerivedO, typename DerivedY, typename DerivedP>
StabilityReport verify_label_stability(const Eigen::MatrixBase<DerivedO>& outputs,
                                       const Eigen::MatrixBase<DerivedY>& labels,
                                       const Eigen::MatrixBase<DerivedP>& perturbed_labels,
                                       Metric metric) {
    if (!is_distance(metric))
        throw ArgumentError("verify_label_stability: metric " + std::string(to_string(metric)) +
                            " is not a distance");
    const auto clean = dfe_vector(outputs, labels, metric);
    const auto noisy = dfe_vector(outputs, perturbed_labels, metric);
    StabilityReport report;
    report.deviation = (clean.values - noisy.values).cwiseAbs();
    report.bound.resize(labels.rows());
    for (Eigen::Index i = 0; i < labels.rows(); ++i)
        report.bound(i) = per_sample_loss(metric, labels.row(i), perturbed_labels.row(i));
    report.lhs = report.deviation.norm();
    report.rhs = label_stability_bound(labels, perturbed_labels, metric);
    report.holds = report.lhs <= report.rhs + kStabilitySlack;
    return report;
}

template <typename DerivedO>
StabilityReport verify_label_stability(const Eigen::MatrixBase<DerivedO>& outputs,
                                       const data::LabeledDataset& dataset,
                                       const RowMatrix& perturbed_labels, Metric metric) {
    return verify_label_stability(outputs, dataset.targets, perturbed_labels, metric);
}

// f(x, lambda) = lambda . x, one output per sample. Lipschitz in x with K = ||lambda||.
struct LinearModel {
    VectorXd weights;

    RowMatrix operator()(const RowMatrix& inputs) const {
        if (inputs.cols() != weights.size())
            throw ArgumentError("LinearModel: input width does not match weights");
        return inputs * weights;
    }
    double lipschitz() const { return weights.norm(); }
};

struct LipschitzEstimate {
    std::size_t pairs = 10000;
    double radius = 0.1;
    std::uint64_t seed = 0;
};

// max ||f(a) - f(b)|| / ||a - b|| over `pairs` random pairs; a is a random
// anchor row and b = a + r u with u a random unit direction and r uniform in
// (0, radius].
template <typename Model>
double estimate_lipschitz(const Model& model, const RowMatrix& anchors, const LipschitzEstimate& opts) {
    if (anchors.rows() == 0) throw ArgumentError("estimate_lipschitz: no anchor points");
    if (opts.pairs == 0 || !(opts.radius > 0.0))
        throw ArgumentError("estimate_lipschitz: need pairs > 0 and radius > 0");
    Xoshiro256 rng(opts.seed);
    const auto n = static_cast<Eigen::Index>(opts.pairs);
    RowMatrix a(n, anchors.cols());
    RowMatrix b(n, anchors.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        a.row(i) = anchors.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(anchors.rows()))));
        VectorXd u(anchors.cols());
        for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = rng.normal();
        double r = opts.radius * (1.0 - rng.uniform());
        b.row(i) = a.row(i) + (r / u.norm()) * u.transpose();
    }
    const RowMatrix fa = model(a);
    const RowMatrix fb = model(b);
    double best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dx = (a.row(i) - b.row(i)).norm();
        if (dx > 0.0) best = std::max(best, (fa.row(i) - fb.row(i)).norm() / dx);
    }
    return best;
}

// Either a supplied Lipschitz constant or the sampled estimator above.
struct LipschitzSource {
    std::optional<double> constant;
    LipschitzEstimate estimate;

    static LipschitzSource supplied(double k) { return {k, {}}; }
    static LipschitzSource estimated(LipschitzEstimate e) { return {std::nullopt, e}; }
};

// Input perturbation: DFE on (x_i, y_i) vs (x~_i, y_i) with d^X Euclidean.
template <typename Model>
StabilityReport verify_input_stability(const Model& model, const RowMatrix& inputs, const RowMatrix& labels,
                                       const RowMatrix& perturbed_inputs, Metric metric,
                                       const LipschitzSource& k_source) {
    if (!is_distance(metric))
        throw ArgumentError("verify_input_stability: metric " + std::string(to_string(metric)) +
                            " is not a distance");
    if (inputs.rows() != perturbed_inputs.rows() || inputs.cols() != perturbed_inputs.cols())
        throw ArgumentError("verify_input_stability: input matrices differ in shape");

    StabilityReport report;
    if (k_source.constant) {
        if (!(*k_source.constant > 0.0))
            throw ArgumentError("verify_input_stability: Lipschitz constant must be positive");
        report.lipschitz = *k_source.constant;
    } else {
        report.lipschitz = estimate_lipschitz(model, inputs, k_source.estimate);
        report.lipschitz_estimated = true;
    }

    const auto clean = dfe_vector(model(inputs), labels, metric);
    const auto moved = dfe_vector(model(perturbed_inputs), labels, metric);
    report.deviation = (clean.values - moved.values).cwiseAbs();
    report.bound = report.lipschitz * (inputs - perturbed_inputs).rowwise().norm();
    report.lhs = report.deviation.norm();
    report.rhs = report.bound.norm();
    report.holds = report.lhs <= report.rhs + kStabilitySlack;
    return report;
}

template <typename Model>
StabilityReport verify_input_stability(const Model& model, const data::LabeledDataset& dataset,
                                       const RowMatrix& perturbed_inputs, Metric metric,
                                       const LipschitzSource& k_source) {
    return verify_input_stability(model, dataset.inputs, labels_for(metric, dataset.targets),
                                  perturbed_inputs, metric, k_source);
}

// CSV: trial,lhs,rhs,holds
void write_stability_csv(std::ostream& out, std::span<const StabilityReport> reports);
std::string stability_summary(std::span<const StabilityReport> reports);

}  // namespace mct::dfe
