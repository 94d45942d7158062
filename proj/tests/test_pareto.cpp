#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mct/error.hpp"
#include "mct/exp/suites.hpp"
#include "mct/pareto/efficiency.hpp"
#include "mct/pareto/synthetic.hpp"
#include "mct/rng.hpp"

using namespace mct;
using namespace mct::pareto;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd pts(std::initializer_list<std::initializer_list<double>> rows) {
    MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (const double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

VectorXd vec(std::initializer_list<double> values) {
    VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const double x : values) v(i++) = x;
    return v;
}

// Brute-force oracles written straight from the definitions.
IndexSet oracle_efficient(const MatrixXd& p) {
    IndexSet out;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        bool dominated = false;
        for (Eigen::Index j = 0; j < p.rows() && !dominated; ++j)
            dominated = (p.row(j).array() <= p.row(i).array()).all() && (p.row(j).array() < p.row(i).array()).any();
        if (!dominated) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

IndexSet oracle_weak(const MatrixXd& p) {
    IndexSet out;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        bool dominated = false;
        for (Eigen::Index j = 0; j < p.rows() && !dominated; ++j) dominated = (p.row(j).array() < p.row(i).array()).all();
        if (!dominated) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

}  // namespace

TEST_CASE("dominance") {
    CHECK(dominates(vec({1, 2}), vec({2, 3})));
    CHECK_FALSE(dominates(vec({1, 2}), vec({1, 2})));
    CHECK_FALSE(dominates(vec({1, 3}), vec({3, 1})));
    CHECK_FALSE(dominates(vec({3, 1}), vec({1, 3})));
    CHECK(dominates(vec({1, 2}), vec({1, 3})));
    CHECK_FALSE(strictly_dominates(vec({1, 2}), vec({1, 3})));
    CHECK(strictly_dominates(vec({0, 2}), vec({1, 3})));
    CHECK_THROWS_AS(dominates(vec({1}), vec({1, 2})), ArgumentError);
}

TEST_CASE("efficient sets on fixed examples") {
    CHECK(efficient_set(pts({{1, 3}, {2, 2}, {3, 1}, {3, 3}})) == IndexSet{0, 1, 2});
    CHECK(efficient_set(pts({{4, 4}})) == IndexSet{0});
    CHECK(efficient_set(pts({{2, 2}, {2, 2}, {2, 2}})) == IndexSet{0, 1, 2});
    CHECK(weakly_efficient_set(pts({{1, 3}, {1, 4}})) == IndexSet{0, 1});
    CHECK(efficient_set(pts({{1, 3}, {1, 4}})) == IndexSet{0});
    CHECK(weakly_efficient_set(pts({{1, 3}, {0, 2}})) == IndexSet{1});
    CHECK(efficient_set(pts({{1, 3}, {0, 2}})) == IndexSet{1});
    CHECK_THROWS_AS(efficient_set(MatrixXd(0, 2)), ArgumentError);
}

TEST_CASE("efficient sets agree with the brute-force oracle") {
    Xoshiro256 rng(21);
    for (int t = 0; t < 1000; ++t) {
        const auto p = static_cast<Eigen::Index>(2 + rng.below(3));
        const auto n = static_cast<Eigen::Index>(1 + rng.below(30));
        MatrixXd m(n, p);
        for (auto& v : m.reshaped()) v = t % 2 ? static_cast<double>(rng.below(5)) : rng.uniform();
        const auto eff = efficient_set(m);
        const auto weak = weakly_efficient_set(m);
        CHECK(eff == oracle_efficient(m));
        CHECK(weak == oracle_weak(m));
        CHECK(is_subset(eff, weak));
    }
}

TEST_CASE("dilated cone membership") {
    const DilatedCone cone(0.5);
    CHECK(cone.contains(vec({1, 0})));
    CHECK(cone.contains(vec({1, -0.4})));
    CHECK_FALSE(cone.contains(vec({1, -0.6})));
    CHECK_THROWS_AS(DilatedCone(0.0), ArgumentError);
    // rho >= 1 admits every vector, including the negative orthant
    CHECK(DilatedCone(1.0).contains(vec({-1, -1})));
}

TEST_CASE("properly efficient sets") {
    const MatrixXd diag = pts({{0, 1}, {1, 0}, {0.5, 0.5}});
    // (1,0) - (0.5,0.5) = (0.5,-0.5) has min/norm = -0.707, so rho = 0.5 keeps all three
    CHECK(properly_efficient_set(diag, DilatedCone(0.5)) == IndexSet{0, 1, 2});
    // at rho = 1 the cone is all of R^2 and every pair blocks each other
    CHECK(properly_efficient_set(diag, DilatedCone(1.0)).empty());
    // the knee point shadows the extremes once rho passes 1/sqrt(2)
    CHECK(properly_efficient_set(diag, DilatedCone(0.75)).empty());

    Xoshiro256 rng(4);
    for (int t = 0; t < 500; ++t) {
        MatrixXd m(static_cast<Eigen::Index>(2 + rng.below(20)), 3);
        for (auto& v : m.reshaped()) v = rng.uniform();
        const auto eff = efficient_set(m);
        for (const double rho : {0.01, 0.1, 0.5, 0.9}) CHECK(is_subset(properly_efficient_set(m, DilatedCone(rho)), eff));
        // small rho recovers the efficient set on generic sets
        CHECK(properly_efficient_set(m, DilatedCone(1e-9)) == eff);
    }
}

TEST_CASE("scalarization argmin") {
    CHECK(scalarization_argmin(pts({{1, 3}, {2, 1}}), vec({1, 0})) == IndexSet{0});
    CHECK(scalarization_argmin(pts({{1, 3}, {3, 1}, {2, 2}}), vec({0.5, 0.5})) == IndexSet{0, 1, 2});
    CHECK_THROWS_AS(scalarization_argmin(pts({{1, 3}}), vec({-0.5, 1.5})), ArgumentError);
    CHECK_THROWS_AS(scalarization_argmin(pts({{1, 3}}), vec({0, 0})), ArgumentError);
    CHECK_THROWS_AS(scalarization_argmin(pts({{1, 3}}), vec({1})), ArgumentError);
}

TEST_CASE("scalarization inclusions on random sets") {
    const auto trials = exp::scalarization_trials(1000, 9);
    CHECK(trials.size() == 3000);
    for (const auto& t : trials) CHECK(t.ok());
}

TEST_CASE("excess") {
    const MatrixXd a = pts({{0}, {10}}), c = pts({{0}});
    CHECK(excess(a, c) == 10.0);
    CHECK(excess(c, a) == 0.0);
    CHECK(excess(pts({{0}}), pts({{3}})) == 3.0);
    CHECK(excess(pts({{1, 1}}), pts({{1, 1}, {4, 5}})) == 0.0);
    CHECK(excess(pts({{0, 0}}), pts({{3, 4}})) == 5.0);
    CHECK_THROWS_AS(excess(MatrixXd(0, 1), c), ArgumentError);
}

TEST_CASE("grids") {
    const auto g = Grid::box1d(-1, 1, 2001);
    CHECK(g.size() == 2001);
    CHECK(g.points(0, 0) == -1.0);
    CHECK(g.points(1000, 0) == 0.0);
    CHECK(g.points(1100, 0) == doctest::Approx(0.1));
    CHECK(g.points(2000, 0) == 1.0);
    CHECK(g.spacing == doctest::Approx(0.001));
    const auto g2 = Grid::box2d(0, 1, 11);
    CHECK(g2.size() == 121);
    CHECK(g2.dim() == 2);
}

TEST_CASE("isolated minimizer constant") {
    const VectorXd zero = VectorXd::Zero(1);
    auto p = SyntheticProblem::quadratic(Grid::box1d(-1, 1, 201), {zero}, {zero}, VectorXd::Ones(1));
    CHECK(isolated_minimizer_constant(p, DataSide::z0, 2.0) == doctest::Approx(1.0));
    // order 1: the ratio is |lambda|, smallest at one grid step
    CHECK(isolated_minimizer_constant(p, DataSide::z0, 1.0) == doctest::Approx(0.01));
    auto fine = SyntheticProblem::quadratic(Grid::box1d(-1, 1, 2001), {zero}, {zero}, VectorXd::Ones(1));
    CHECK(isolated_minimizer_constant(fine, DataSide::z0, 1.0) == doctest::Approx(0.001));

    // adding a constant to l changes nothing
    auto shifted = p;
    shifted.criteria = {[](const VectorXd& l, const VectorXd& z) { return (l - z).squaredNorm() + 7.0; }};
    CHECK(isolated_minimizer_constant(shifted, DataSide::z0, 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(isolated_minimizer_constant(p, DataSide::z0, 0.0), ArgumentError);

    auto flat = p;
    flat.criteria = {[](const VectorXd&, const VectorXd&) { return 1.0; }};
    CHECK_THROWS_AS(isolated_minimizer_constant(flat, DataSide::z0, 2.0), std::runtime_error);
}

TEST_CASE("hoelder constant") {
    const VectorXd zero = VectorXd::Zero(1);
    auto p = SyntheticProblem::quadratic(Grid::box1d(-1, 1, 201), {zero}, {zero}, VectorXd::Ones(1));
    p.seed = 3;
    const double m = holder_constant(p, 1.0);
    CHECK(m <= 4.0);
    CHECK(m > 3.5);

    auto doubled = p;
    doubled.criteria = {[](const VectorXd& l, const VectorXd& z) { return 2.0 * (l - z).squaredNorm(); }};
    CHECK(holder_constant(doubled, 1.0) == doctest::Approx(2.0 * m));

    auto constant = p;
    constant.criteria = {[](const VectorXd& l, const VectorXd&) { return l.squaredNorm(); }};
    CHECK(holder_constant(constant, 1.0) == 0.0);
}

TEST_CASE("estimation bound worked instance") {
    const auto r = verify_estimation_bound(exp::worked_estimation_instance());
    CHECK(r.status == BoundStatus::holds);
    CHECK(r.excess == doctest::Approx(0.2));
    CHECK(r.bound == doctest::Approx(std::sqrt(8.0) * std::sqrt(0.4)));
    CHECK(r.bound == doctest::Approx(1.789).epsilon(1e-3));
    CHECK(r.h_star == doctest::Approx(1.0));
    CHECK(r.m_star <= 4.0);
    CHECK(r.minimizer_z0(0) == 0.0);
    CHECK(r.minimizer_z(0) == doctest::Approx(0.2));
    CHECK(r.holds() == std::optional<bool>(true));
}

TEST_CASE("estimation bound with unperturbed data") {
    const VectorXd a = VectorXd::Constant(1, 0.3), b = VectorXd::Constant(1, -0.4);
    auto p = SyntheticProblem::quadratic(Grid::box1d(-1, 1, 2001), {a, b}, {a, b}, vec({0.5, 0.5}));
    p.iso_h = 0.5;
    const auto r = verify_estimation_bound(p);
    CHECK(r.excess == 0.0);
    CHECK(r.bound == 0.0);
    CHECK(r.status == BoundStatus::holds);
}

TEST_CASE("estimation bound reports uncertified hypotheses") {
    // with m = 1 the sampled Hoelder constant of (lambda - z)^2 exceeds the claim
    auto p = exp::worked_estimation_instance();
    p.holder_m = 1.0;
    const auto r = verify_estimation_bound(p);
    CHECK(r.status == BoundStatus::hypotheses_not_met);
    CHECK_FALSE(r.holds().has_value());
}

TEST_CASE("estimation bound on random instances") {
    const auto reports = exp::estimation_trials(40, 12);
    for (const auto& r : reports) {
        CHECK(r.status == BoundStatus::holds);
        CHECK(r.excess <= r.bound + r.tolerance);
    }
    std::ostringstream csv;
    write_bound_csv(csv, reports);
    CHECK(csv.str().rfind("instance,excess,bound,holds\n", 0) == 0);
}

TEST_CASE("local form restricts the grid") {
    const auto r = verify_estimation_bound(exp::worked_estimation_instance(), 0.5);
    CHECK(r.status == BoundStatus::holds);
    CHECK(r.excess == doctest::Approx(0.2));
}

TEST_CASE("convergence") {
    const VectorXd a = VectorXd::Constant(1, -0.3), b = VectorXd::Constant(1, 0.5);
    const auto p = SyntheticProblem::quadratic(Grid::box1d(-1, 1, 101), {a, b}, {a, b}, vec({0.5, 0.5}));
    ConvergenceSchedule constant;
    constant.direction = {VectorXd::Ones(1), -VectorXd::Ones(1)};
    constant.c = 0.0;
    const auto still = verify_convergence(p, constant);
    CHECK(still.steps.size() == 64);
    for (const auto& s : still.steps) {
        CHECK(s.weak_distance == 0.0);
        CHECK(s.proper_distance == 0.0);
    }

    ConvergenceSchedule moving = constant;
    moving.c = 1.0;
    const auto r = verify_convergence(p, moving);
    CHECK(r.steps.front().weak_distance > r.tolerance);
    CHECK(r.steps.back().weak_distance <= r.tolerance);
    CHECK(r.steps.back().proper_distance <= r.tolerance);
    CHECK(r.converged);

    for (const auto& t : exp::convergence_trials(20, 2)) CHECK(t.report.converged);
}
