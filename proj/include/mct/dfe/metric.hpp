#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mct/error.hpp"

namespace mct::dfe {

// Per-sample data-fitting error d^Y(prediction, label).
//
//   squared_error         sum_k (p_k - y_k)^2
//   logistic              sum_k ln(1 + exp(-p_k * y_k)),  y_k in {-1, 1}
//   binary_cross_entropy  -sum_k [y_k ln p_k + (1 - y_k) ln(1 - p_k)],  p clipped
//   euclidean             ||p - y||_2
//
// Only euclidean is a distance; the stability verifiers require it.
enum class Metric { squared_error, logistic, binary_cross_entropy, euclidean };

inline constexpr double kBceClip = 1e-12;

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::squared_error: return "squared-error";
        case Metric::logistic: return "logistic";
        case Metric::binary_cross_entropy: return "binary-cross-entropy";
        case Metric::euclidean: return "euclidean";
    }
    return "unknown";
}

inline Metric parse_metric(std::string_view name) {
    if (name == "squared-error" || name == "mse" || name == "se") return Metric::squared_error;
    if (name == "logistic") return Metric::logistic;
    if (name == "binary-cross-entropy" || name == "bce") return Metric::binary_cross_entropy;
    if (name == "euclidean") return Metric::euclidean;
    throw ArgumentError("unknown metric '" + std::string(name) + "'");
}

inline bool is_distance(Metric m) { return m == Metric::euclidean; }

namespace detail {

// ln(1 + e^{-u}) without overflow for large |u|.
template <typename Scalar>
Scalar softplus_neg(Scalar u) {
    using std::exp;
    using std::log1p;
    return u > Scalar(0) ? log1p(exp(-u)) : -u + log1p(exp(u));
}

template <typename Scalar>
Scalar clip_probability(Scalar p) {
    return std::clamp(p, Scalar(kBceClip), Scalar(1 - kBceClip));
}

}  // namespace detail

template <typename DerivedP, typename DerivedY>
typename DerivedP::Scalar per_sample_loss(Metric metric, const Eigen::MatrixBase<DerivedP>& prediction,
                                          const Eigen::MatrixBase<DerivedY>& label) {
    using Scalar = typename DerivedP::Scalar;
    if (prediction.size() != label.size()) {
        throw ArgumentError("per_sample_loss: prediction has " + std::to_string(prediction.size()) +
                            " entries, label has " + std::to_string(label.size()));
    }
    const auto p = prediction.reshaped();
    const auto y = label.reshaped();
    Scalar total(0);
    switch (metric) {
        case Metric::squared_error:
            for (Eigen::Index k = 0; k < p.size(); ++k) total += (p(k) - y(k)) * (p(k) - y(k));
            return total;
        case Metric::logistic:
            for (Eigen::Index k = 0; k < p.size(); ++k) total += detail::softplus_neg(Scalar(p(k) * y(k)));
            return total;
        case Metric::binary_cross_entropy:
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                const Scalar q = detail::clip_probability(Scalar(p(k)));
                total -= y(k) * std::log(q) + (1 - y(k)) * std::log(1 - q);
            }
            return total;
        case Metric::euclidean:
            for (Eigen::Index k = 0; k < p.size(); ++k) total += (p(k) - y(k)) * (p(k) - y(k));
            return std::sqrt(total);
    }
    return total;
}

// d per_sample_loss / d prediction, written into `grad` (same length as p).
// Clipped BCE entries have zero derivative; euclidean at p == y returns 0.
template <typename DerivedP, typename DerivedY, typename DerivedG>
void per_sample_loss_gradient(Metric metric, const Eigen::MatrixBase<DerivedP>& p,
                              const Eigen::MatrixBase<DerivedY>& y,
                              Eigen::MatrixBase<DerivedG> const& grad_out) {
    using Scalar = typename DerivedP::Scalar;
    auto& grad = const_cast<Eigen::MatrixBase<DerivedG>&>(grad_out);
    switch (metric) {
        case Metric::squared_error:
            grad = Scalar(2) * (p - y);
            return;
        case Metric::logistic:
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                const Scalar u = p(k) * y(k);
                grad(k) = -y(k) / (Scalar(1) + std::exp(u));
            }
            return;
        case Metric::binary_cross_entropy:
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                const Scalar q = p(k);
                if (q <= Scalar(kBceClip) || q >= Scalar(1 - kBceClip)) {
                    grad(k) = Scalar(0);
                } else {
                    grad(k) = -y(k) / q + (Scalar(1) - y(k)) / (Scalar(1) - q);
                }
            }
            return;
        case Metric::euclidean: {
            const Scalar r = (p - y).norm();
            if (r == Scalar(0)) {
                grad.setZero();
            } else {
                grad = (p - y) / r;
            }
            return;
        }
    }
}

// Logistic labels live in {-1, 1}; one-hot targets are mapped by 2y - 1.
template <typename Derived>
auto labels_for(Metric metric, const Eigen::MatrixBase<Derived>& targets) {
    using Plain = typename Derived::PlainObject;
    using Scalar = typename Derived::Scalar;
    Plain out = targets;
    if (metric == Metric::logistic) out = (Scalar(2) * targets.array() - Scalar(1)).matrix();
    return out;
}

}  // namespace mct::dfe
