#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "mct/dfe/dfe.hpp"
#include "mct/dfe/stability.hpp"
#include "mct/error.hpp"
#include "mct/nn/network.hpp"
#include "mct/rng.hpp"

using namespace mct;
using namespace mct::dfe;

namespace {

RowMatrix row(std::initializer_list<double> values) {
    RowMatrix m(1, static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const double v : values) m(0, i++) = v;
    return m;
}

}  // namespace

TEST_CASE("per-sample losses") {
    CHECK(per_sample_loss(Metric::squared_error, row({0.5}), row({1.0})) == doctest::Approx(0.25));
    CHECK(per_sample_loss(Metric::logistic, row({0.0}), row({1.0})) == doctest::Approx(std::numbers::ln2));
    CHECK(per_sample_loss(Metric::binary_cross_entropy, row({0.5}), row({1.0})) == doctest::Approx(std::numbers::ln2));
    CHECK(per_sample_loss(Metric::euclidean, row({0.0, 3.0}), row({4.0, 0.0})) == doctest::Approx(5.0));
    // logistic stays finite far out in both directions
    CHECK(per_sample_loss(Metric::logistic, row({800.0}), row({-1.0})) == doctest::Approx(800.0));
    CHECK(per_sample_loss(Metric::logistic, row({800.0}), row({1.0})) == doctest::Approx(0.0));
    // cross-entropy is clipped, so p = 0 with y = 1 is large but finite
    const double clipped = per_sample_loss(Metric::binary_cross_entropy, row({0.0}), row({1.0}));
    CHECK(std::isfinite(clipped));
    CHECK(clipped == doctest::Approx(-std::log(kBceClip)));
    CHECK_THROWS_AS(per_sample_loss(Metric::squared_error, row({0.5, 0.5}), row({1.0})), ArgumentError);
}

TEST_CASE("per-sample loss gradients match differences") {
    const RowMatrix y = row({1.0, 0.0, 1.0});
    for (const auto m : {Metric::squared_error, Metric::logistic, Metric::binary_cross_entropy, Metric::euclidean}) {
        CAPTURE(to_string(m));
        const RowMatrix p = row({0.3, 0.6, 0.8});
        const RowMatrix yy = m == Metric::logistic ? RowMatrix(2.0 * y.array() - 1.0) : y;
        RowMatrix g(1, 3);
        per_sample_loss_gradient(m, p, yy, g);
        for (Eigen::Index k = 0; k < 3; ++k) {
            RowMatrix up = p, down = p;
            up(0, k) += 1e-6;
            down(0, k) -= 1e-6;
            const double fd = (per_sample_loss(m, up, yy) - per_sample_loss(m, down, yy)) / 2e-6;
            CHECK(g(0, k) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("metric names parse") {
    CHECK(parse_metric("bce") == Metric::binary_cross_entropy);
    CHECK(parse_metric("squared-error") == Metric::squared_error);
    CHECK(parse_metric(to_string(Metric::logistic)) == Metric::logistic);
    CHECK_THROWS_AS(parse_metric("hinge"), ArgumentError);
}

TEST_CASE("dfe vector") {
    RowMatrix out(2, 1), y(2, 1);
    out << 0.5, 1.0;
    y << 1.0, 1.0;
    const auto v = dfe_vector(out, y, Metric::squared_error);
    CHECK(v.values(0) == doctest::Approx(0.25));
    CHECK(v.values(1) == 0.0);

    RowMatrix t = RowMatrix::Zero(3, 4);
    t(0, 1) = t(1, 3) = t(2, 0) = 1.0;
    CHECK(dfe_vector(t, t, Metric::squared_error).values.isZero(0.0));

    // permuting samples permutes entries
    RowMatrix p(3, 4);
    p.setRandom();
    p = p.cwiseAbs();
    const auto base = dfe_vector(p, t, Metric::binary_cross_entropy).values;
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
    perm.indices() << 2, 0, 1;
    const RowMatrix pp = perm * p, tt = perm * t;
    const VectorXd moved = dfe_vector(pp, tt, Metric::binary_cross_entropy).values;
    CHECK(moved == perm * base);

    CHECK_THROWS_AS(dfe_vector(p, RowMatrix(RowMatrix::Zero(2, 4)), Metric::squared_error), ArgumentError);
}

TEST_CASE("scalarize") {
    DfeVector a{VectorXd::Constant(4, 0.3), "a"}, b{VectorXd::Constant(2, 0.6), "b"}, c{VectorXd::Constant(5, 0.9), "c"};
    const std::vector<DfeVector> three{a, b, c};
    CHECK(scalarize(three, ScalarizationWeights::uniform(3)) == doctest::Approx(0.6));

    VectorXd vals(4);
    vals << 0.25, 0.0, 1.0, 0.75;
    const std::vector<DfeVector> one{{vals, "x"}};
    CHECK(scalarize(one, ScalarizationWeights::uniform(1)) == doctest::Approx(0.5));

    const std::vector<DfeVector> zeros{{VectorXd::Zero(3), "z"}, {VectorXd::Zero(2), "w"}};
    CHECK(scalarize(zeros, ScalarizationWeights::uniform(2)) == 0.0);
    CHECK_THROWS_AS(scalarize(zeros, ScalarizationWeights::uniform(3)), ArgumentError);
}

TEST_CASE("scalarization weights validate") {
    CHECK_THROWS_AS(ScalarizationWeights(VectorXd::Constant(2, 0.4)), ArgumentError);
    VectorXd neg(2);
    neg << 1.2, -0.2;
    CHECK_THROWS_AS(ScalarizationWeights{neg}, ArgumentError);
    CHECK_THROWS_AS(ScalarizationWeights::unnormalized(neg), ArgumentError);
    CHECK(ScalarizationWeights::unnormalized(VectorXd::Constant(2, 2.0)).betas().sum() == 4.0);
}

TEST_CASE("epsilon weights") {
    const auto w0 = epsilon_weights(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(w0[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const auto w = epsilon_weights(3, 0.01);
    CHECK(w[0] == doctest::Approx(1.0 / 3.0 + 0.01).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(1.0 / 3.0 - 0.005).epsilon(1e-14));
    CHECK(w[2] == w[1]);
    CHECK(std::abs(w.betas().sum() - 1.0) <= 4 * std::numeric_limits<double>::epsilon());

    try {
        epsilon_weights(3, 0.7);
        FAIL("expected ArgumentError");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("positiv") != std::string::npos);
    }
    CHECK_THROWS_AS(epsilon_weights(3, -0.7), ArgumentError);
    CHECK_THROWS_AS(epsilon_weights(0, 0.0), ArgumentError);
    CHECK(epsilon_weights(1, 0.0)[0] == 1.0);
    CHECK_THROWS_AS(epsilon_weights(1, 0.1), ArgumentError);
}

TEST_CASE("label stability bound") {
    RowMatrix y(2, 1), yt(2, 1);
    y << 1.0, 0.0;
    yt << 1.1, -0.1;
    CHECK(label_stability_bound(y, y, Metric::euclidean) == 0.0);
    CHECK(label_stability_bound(y, yt, Metric::euclidean) == doctest::Approx(std::sqrt(0.02)));
    const RowMatrix scaled = y + 3.0 * (yt - y);
    CHECK(label_stability_bound(y, scaled, Metric::euclidean) ==
          doctest::Approx(3.0 * label_stability_bound(y, yt, Metric::euclidean)));
}

TEST_CASE("label stability holds and is tight on single-sample shifts") {
    RowMatrix outputs(3, 1), y(3, 1);
    outputs << 0.2, 0.5, 0.9;
    y << 0.0, 1.0, 1.0;
    const auto zero = verify_label_stability(outputs, y, y, Metric::euclidean);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    CHECK(zero.holds);

    // moving y_1 away from the output: the deviation equals the shift
    RowMatrix moved = y;
    moved(0, 0) = -0.5;
    const auto r = verify_label_stability(outputs, y, moved, Metric::euclidean);
    CHECK(r.holds);
    CHECK(r.lhs == doctest::Approx(0.5));
    CHECK(r.rhs == doctest::Approx(0.5));

    CHECK_THROWS_AS(verify_label_stability(outputs, y, moved, Metric::squared_error), ArgumentError);
}

TEST_CASE("input stability with the analytic linear-model constant") {
    Xoshiro256 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        LinearModel model{VectorXd::NullaryExpr(3, [&] { return rng.normal(); })};
        RowMatrix x = RowMatrix::NullaryExpr(20, 3, [&] { return rng.normal(); });
        RowMatrix y = RowMatrix::NullaryExpr(20, 1, [&] { return rng.normal(); });
        RowMatrix xt = x + 0.3 * RowMatrix::NullaryExpr(20, 3, [&] { return rng.normal(); });
        const auto r = verify_input_stability(model, x, y, xt, Metric::euclidean, LipschitzSource::supplied(model.lipschitz()));
        CHECK(r.holds);
        CHECK_FALSE(r.lipschitz_estimated);
    }
    LinearModel model{VectorXd::Ones(2)};
    RowMatrix x = RowMatrix::Ones(4, 2), y = RowMatrix::Zero(4, 1);
    const auto r = verify_input_stability(model, x, y, x, Metric::euclidean, LipschitzSource::supplied(1.0));
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK_THROWS_AS(verify_input_stability(model, x, y, x, Metric::euclidean, LipschitzSource::supplied(0.0)),
                    ArgumentError);
}

TEST_CASE("input stability with an estimated constant on a sigmoid network") {
    const auto net = nn::init_network(nn::Architecture::mlp, {4, 6, 2}, 17);
    Xoshiro256 rng(8);
    int failures = 0;
    bool flagged = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const RowMatrix x = RowMatrix::NullaryExpr(10, 4, [&] { return rng.uniform(); });
        const RowMatrix y = RowMatrix::NullaryExpr(10, 2, [&] { return rng.uniform(); });
        // perturbations at the scale of the sampled pairs
        const RowMatrix xt = x + 0.02 * RowMatrix::NullaryExpr(10, 4, [&] { return rng.normal(); });
        const auto r = verify_input_stability(net, x, y, xt, Metric::euclidean,
                                              LipschitzSource::estimated({2000, 0.1, static_cast<std::uint64_t>(trial)}));
        failures += r.holds ? 0 : 1;
        flagged = flagged && r.lipschitz_estimated;
    }
    CHECK(failures == 0);
    CHECK(flagged);
}

TEST_CASE("stability csv") {
    std::vector<StabilityReport> reports(2);
    reports[1].lhs = 2.0;
    reports[1].rhs = 1.0;
    reports[1].holds = false;
    std::ostringstream out;
    write_stability_csv(out, reports);
    CHECK(out.str() == "trial,lhs,rhs,holds\n0,0,0,true\n1,2,1,false\n");
    CHECK(stability_summary(reports).find("1 violations") != std::string::npos);
}
