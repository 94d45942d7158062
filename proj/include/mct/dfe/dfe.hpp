#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mct/data/dataset.hpp"
#include "mct/dfe/metric.hpp"
#include "mct/error.hpp"
#include "mct/types.hpp"

namespace mct::dfe {

// The vector of per-sample errors (d^Y(f(x_i), y_i))_i for one dataset.
struct DfeVector {
    VectorXd values;
    std::string dataset_name;

    double mean() const { return values.size() == 0 ? 0.0 : values.mean(); }
};

// Row i of `outputs` against row i of `labels`. Labels are used as given.
template <typename DerivedO, typename DerivedY>
DfeVector dfe_vector(const Eigen::MatrixBase<DerivedO>& outputs, const Eigen::MatrixBase<DerivedY>& labels,
                     Metric metric, std::string name = {}) {
    if (outputs.rows() != labels.rows() || outputs.cols() != labels.cols()) {
        throw ArgumentError("dfe_vector: outputs are " + std::to_string(outputs.rows()) + "x" +
                            std::to_string(outputs.cols()) + ", labels are " +
                            std::to_string(labels.rows()) + "x" + std::to_string(labels.cols()));
    }
    DfeVector out{VectorXd(outputs.rows()), std::move(name)};
    for (Eigen::Index i = 0; i < outputs.rows(); ++i)
        out.values(i) = per_sample_loss(metric, outputs.row(i), labels.row(i));
    return out;
}

// Against a dataset's one-hot targets (mapped to {-1,1} for the logistic metric).
template <typename DerivedO>
DfeVector dfe_vector(const Eigen::MatrixBase<DerivedO>& outputs, const data::LabeledDataset& dataset,
                     Metric metric) {
    if (static_cast<std::size_t>(outputs.rows()) != dataset.size()) {
        throw ArgumentError("dfe_vector: " + std::to_string(outputs.rows()) + " output rows for " +
                            std::to_string(dataset.size()) + " samples in " + dataset.name);
    }
    return dfe_vector(outputs, labels_for(metric, dataset.targets), metric, dataset.name);
}

// Nonnegative per-dataset weights beta summing to one.
class ScalarizationWeights {
public:
    static constexpr double kSumTolerance = 1e-12;

    explicit ScalarizationWeights(VectorXd betas) : betas_(std::move(betas)) {
        check_nonnegative();
        if (std::abs(betas_.sum() - 1.0) > kSumTolerance) {
            throw ArgumentError("scalarization weights sum to " + std::to_string(betas_.sum()) +
                                ", expected 1");
        }
    }

    // Skips the sum-to-one check. Used to probe linearity of the scalarized loss.
    static ScalarizationWeights unnormalized(VectorXd betas) {
        ScalarizationWeights w;
        w.betas_ = std::move(betas);
        w.check_nonnegative();
        return w;
    }

    static ScalarizationWeights uniform(std::size_t m) {
        return ScalarizationWeights(VectorXd::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m)));
    }

    const VectorXd& betas() const { return betas_; }
    std::size_t size() const { return static_cast<std::size_t>(betas_.size()); }
    double operator[](std::size_t i) const { return betas_(static_cast<Eigen::Index>(i)); }

private:
    ScalarizationWeights() = default;

    void check_nonnegative() const {
        if (betas_.size() == 0) throw ArgumentError("scalarization weights: empty");
        for (Eigen::Index i = 0; i < betas_.size(); ++i) {
            if (!(betas_(i) >= 0.0)) {
                throw ArgumentError("scalarization weight " + std::to_string(i + 1) + " = " +
                                    std::to_string(betas_(i)) + " is negative");
            }
        }
    }

    VectorXd betas_;
};

// sum_i beta_i * mean(DFE_i). Inner per-sample weights are uniform 1/s_i.
double scalarize(std::span<const DfeVector> dfe_vectors, const ScalarizationWeights& weights);

// (1/M + eps, 1/M - eps/(M-1), ..., 1/M - eps/(M-1)). Throws ArgumentError if
// any weight would be negative: positive weights are what make minimizers of
// the scalarized loss properly efficient.
ScalarizationWeights epsilon_weights(std::size_t m, double epsilon);

}  // namespace mct::dfe
