#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mct/error.hpp"

// Brute-force efficiency analysis of finite point sets in objective space.
// Point sets are matrices with one point per row; all functions return sorted
// row indices and keep every tied point.

namespace mct::pareto {

struct ObjectivePointSet {
    Eigen::MatrixXd points;           // n x p
    std::vector<std::string> labels;  // optional, one per point

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

using IndexSet = std::vector<std::size_t>;

namespace detail {

template <typename Derived>
void require_nonempty(const Eigen::MatrixBase<Derived>& points, const char* what) {
    if (points.rows() == 0 || points.cols() == 0)
        throw ArgumentError(std::string(what) + ": empty point set");
}

// Indices i for which no j != i satisfies blocks(row_j, row_i).
template <typename Derived, typename Blocks>
IndexSet unblocked(const Eigen::MatrixBase<Derived>& points, Blocks blocks) {
    IndexSet out;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        bool blocked = false;
        for (Eigen::Index j = 0; j < points.rows() && !blocked; ++j)
            blocked = j != i && blocks(points.row(j), points.row(i));
        if (!blocked) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

}  // namespace detail

// a <= b componentwise and a != b: a dominates b under minimization.
template <typename DerivedA, typename DerivedB>
bool dominates(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size())
        throw ArgumentError("dominates: dimensions " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()) + " differ");
    bool strictly_somewhere = false;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (a(k) > b(k)) return false;
        if (a(k) < b(k)) strictly_somewhere = true;
    }
    return strictly_somewhere;
}

// a < b in every component.
template <typename DerivedA, typename DerivedB>
bool strictly_dominates(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) throw ArgumentError("strictly_dominates: dimension mismatch");
    return (a.array() < b.array()).all();
}

template <typename Derived>
IndexSet efficient_set(const Eigen::MatrixBase<Derived>& points) {
    detail::require_nonempty(points, "efficient_set");
    return detail::unblocked(points, [](const auto& other, const auto& self) { return dominates(other, self); });
}

template <typename Derived>
IndexSet weakly_efficient_set(const Eigen::MatrixBase<Derived>& points) {
    detail::require_nonempty(points, "weakly_efficient_set");
    return detail::unblocked(points,
                             [](const auto& other, const auto& self) { return strictly_dominates(other, self); });
}

inline IndexSet efficient_set(const ObjectivePointSet& set) { return efficient_set(set.points); }
inline IndexSet weakly_efficient_set(const ObjectivePointSet& set) { return weakly_efficient_set(set.points); }

// C_rho = { y : min_i y_i >= -rho ||y||_2 }. Contains the Pareto cone, with
// every nonzero point of it in the interior. For rho >= 1 the test accepts
// every vector, so useful values lie in (0, 1).
struct DilatedCone {
    double rho = 0.1;

    explicit DilatedCone(double r) : rho(r) {
        if (!(rho > 0.0)) throw ArgumentError("DilatedCone: rho must be positive");
    }

    template <typename Derived>
    bool contains(const Eigen::MatrixBase<Derived>& y) const {
        return y.minCoeff() >= -rho * y.norm();
    }
};

// Points y with no other point y' such that y - y' lies in C_rho \ {0}.
template <typename Derived>
IndexSet properly_efficient_set(const Eigen::MatrixBase<Derived>& points, const DilatedCone& cone) {
    detail::require_nonempty(points, "properly_efficient_set");
    return detail::unblocked(points, [&cone](const auto& other, const auto& self) {
        const Eigen::VectorXd diff = (self - other).transpose();
        return !diff.isZero(0.0) && cone.contains(diff);
    });
}

inline IndexSet properly_efficient_set(const ObjectivePointSet& set, const DilatedCone& cone) {
    return properly_efficient_set(set.points, cone);
}

inline constexpr double kArgminRelTolerance = 1e-12;

// argmin over rows of sum_k beta_k y_k. Values within a relative 1e-12 of the
// minimum count as ties and are all returned.
template <typename Derived, typename DerivedB>
IndexSet scalarization_argmin(const Eigen::MatrixBase<Derived>& points, const Eigen::MatrixBase<DerivedB>& betas) {
    detail::require_nonempty(points, "scalarization_argmin");
    if (betas.size() != points.cols())
        throw ArgumentError("scalarization_argmin: " + std::to_string(betas.size()) + " weights for " +
                            std::to_string(points.cols()) + " objectives");
    if ((betas.array() < 0.0).any()) throw ArgumentError("scalarization_argmin: negative weight");
    if (!(betas.array() > 0.0).any()) throw ArgumentError("scalarization_argmin: all weights are zero");
    const Eigen::VectorXd values = points * betas.reshaped();
    const double best = values.minCoeff();
    const double tol = kArgminRelTolerance * std::max(1.0, std::abs(best));
    IndexSet out;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (values(i) <= best + tol) out.push_back(static_cast<std::size_t>(i));
    return out;
}

// e(A, C) = sup_{a in A} inf_{c in C} ||a - c||_2, rows are points.
template <typename DerivedA, typename DerivedC>
double excess(const Eigen::MatrixBase<DerivedA>& a_set, const Eigen::MatrixBase<DerivedC>& c_set) {
    if (a_set.rows() == 0 || c_set.rows() == 0) throw ArgumentError("excess: empty set");
    if (a_set.cols() != c_set.cols()) throw ArgumentError("excess: dimension mismatch");
    double sup = 0.0;
    for (Eigen::Index i = 0; i < a_set.rows(); ++i) {
        double inf = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < c_set.rows() && inf > 0.0; ++j)
            inf = std::min(inf, (a_set.row(i) - c_set.row(j)).norm());
        sup = std::max(sup, inf);
    }
    return sup;
}

// Rows of `points` selected by `indices`.
template <typename Derived>
Eigen::MatrixXd select_rows(const Eigen::MatrixBase<Derived>& points, const IndexSet& indices) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), points.cols());
    for (std::size_t i = 0; i < indices.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(indices[i]));
    return out;
}

inline bool is_subset(const IndexSet& inner, const IndexSet& outer) {
    return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

}  // namespace mct::pareto
