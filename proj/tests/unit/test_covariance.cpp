#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "rome/covariance.hpp"
#include "rome/errors.hpp"
#include "rome/simulate.hpp"

using namespace rome;
using doctest::Approx;

namespace {

Hierarchy fig1() { return build_hierarchy(figure1_hierarchy()); }

ResidualPanel random_panel(std::uint64_t seed, Eigen::Index n, Eigen::Index T) {
    std::mt19937_64 rng(seed);
    return {oracle::random_matrix(rng, n, T)};
}

}  // namespace

TEST_CASE("W1 estimator") {
    ResidualPanel id{Eigen::MatrixXd::Identity(4, 4)};
    CHECK(estimate_w1(id).isApprox(0.25 * Eigen::MatrixXd::Identity(4, 4)));

    ResidualPanel one{Eigen::RowVector3d(1, -1, 2)};
    CHECK(estimate_w1(one)(0, 0) == Approx(2.0));

    const auto p = random_panel(3, 5, 40);
    CHECK((estimate_w1(p) - oracle::brute_w1(p.residuals)).cwiseAbs().maxCoeff() <= 1e-12);

    ResidualPanel bad{Eigen::MatrixXd::Ones(2, 3)};
    bad.residuals(1, 1) = std::nan("");
    CHECK_THROWS_AS(estimate_w1(bad), ValidationError);
    CHECK_THROWS_AS(estimate_w1(ResidualPanel{Eigen::MatrixXd::Ones(2, 1)}), ValidationError);
}

TEST_CASE("designs on the figure-1 tree") {
    const Hierarchy h = fig1();
    const auto p = random_panel(5, 9, 60);
    CHECK(realize_design({CovKind::OLS}, &p, h).W == Eigen::MatrixXd::Identity(9, 9));
    CHECK(realize_design({CovKind::OLS}, nullptr, h).W == Eigen::MatrixXd::Identity(9, 9));

    Eigen::VectorXd wlss(9);
    wlss << 6, 2, 4, 1, 1, 1, 1, 1, 1;
    CHECK(realize_design({CovKind::WLSs}, nullptr, h).W == Eigen::MatrixXd(wlss.asDiagonal()));

    const Eigen::MatrixXd w1 = oracle::brute_w1(p.residuals);
    const auto wlsv = realize_design({CovKind::WLSv}, &p, h);
    CHECK(wlsv.diagonal);
    CHECK(wlsv.W.isApprox(Eigen::MatrixXd(w1.diagonal().asDiagonal()), 1e-12));
    CHECK(realize_design({CovKind::Sample}, &p, h).W.isApprox(w1, 1e-12));

    // Shrink at lambda = 1 is WLSv; intermediate lambda interpolates entrywise.
    CHECK(realize_design({CovKind::Shrink, 1.0}, &p, h).W == wlsv.W);
    const auto half = realize_design({CovKind::Shrink, 0.25}, &p, h);
    for (Eigen::Index i = 0; i < 9; ++i) {
        for (Eigen::Index j = 0; j < 9; ++j) {
            const double want = i == j ? w1(i, i) : 0.75 * w1(i, j);
            CHECK(half.W(i, j) == Approx(want).epsilon(1e-12));
        }
    }
    CHECK(half.shrink_lambda == 0.25);

    const auto est = realize_design({CovKind::Shrink}, &p, h);
    CHECK(est.shrink_lambda == Approx(oracle::brute_shrinkage(p.residuals)).epsilon(1e-10));

    const auto scaled = realize_design({CovKind::Sample, std::nullopt, 3.0}, &p, h);
    CHECK(scaled.W.isApprox(3.0 * w1, 1e-12));
}

TEST_CASE("designs: symmetry and validation") {
    const Hierarchy h = fig1();
    const auto p = random_panel(9, 9, 50);
    for (auto k : {CovKind::OLS, CovKind::WLSv, CovKind::WLSs, CovKind::Sample, CovKind::Shrink}) {
        const auto W = realize_design({k}, &p, h);
        CHECK((W.W - W.W.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((W.sqrt * W.sqrt - W.W).norm() <= 1e-8 * W.W.norm());
        CHECK((W.sqrt * W.inv_sqrt - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() <= 1e-8);
    }
    CHECK_THROWS_WITH_AS(realize_design({CovKind::WLSv}, nullptr, h), doctest::Contains("requires in-sample residuals"),
                         ValidationError);
    CHECK_THROWS_AS(realize_design({CovKind::Shrink, 1.5}, &p, h), ValidationError);
    CHECK_THROWS_AS(realize_design({CovKind::OLS, std::nullopt, 0.0}, &p, h), ValidationError);
    const auto wrong = random_panel(1, 4, 50);
    CHECK_THROWS_AS(realize_design({CovKind::Sample}, &wrong, h), ValidationError);

    // Fewer samples than series: the sample matrix is singular.
    const auto short_panel = random_panel(2, 9, 4);
    CHECK_THROWS_WITH_AS(realize_design({CovKind::Sample}, &short_panel, h), doctest::Contains("sample"), NumericError);
}

TEST_CASE("shrinkage intensity") {
    SUBCASE("matches the brute-force formula and stays in [0,1]") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto p = random_panel(100 + s, 2 + static_cast<Eigen::Index>(s % 7), 5 + static_cast<Eigen::Index>(s * 3));
            const double lam = shrinkage_lambda(p);
            CHECK(lam >= 0.0);
            CHECK(lam <= 1.0);
            CHECK(lam == Approx(oracle::brute_shrinkage(p.residuals)).epsilon(1e-10));
        }
    }
    SUBCASE("perfectly correlated pair") {
        std::mt19937_64 rng(4);
        Eigen::MatrixXd e(2, 200);
        e.row(0) = oracle::random_matrix(rng, 1, 200);
        e.row(1) = 2.0 * e.row(0);
        CHECK(shrinkage_lambda({e}) < 0.05);
    }
    SUBCASE("zero-variance series") {
        Eigen::MatrixXd e = Eigen::MatrixXd::Ones(3, 10);
        e.row(1).setZero();
        CHECK_THROWS_AS(shrinkage_lambda({e}), ValidationError);
    }
    SUBCASE("too few samples") { CHECK_THROWS_AS(shrinkage_lambda(random_panel(1, 3, 2)), ValidationError); }
}

TEST_CASE("matrix square root") {
    Eigen::Matrix2d d;
    d << 4, 0, 0, 9;
    const auto [r, ri] = matrix_sqrt(d);
    CHECK(r.isApprox(Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix()));
    CHECK(ri.isApprox(Eigen::Vector2d(0.5, 1.0 / 3.0).asDiagonal().toDenseMatrix()));
    CHECK(matrix_sqrt(Eigen::MatrixXd::Identity(5, 5)).first == Eigen::MatrixXd::Identity(5, 5));

    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const Eigen::MatrixXd W = oracle::random_spd(rng, 6, 1e3);
        const auto [root, inv] = matrix_sqrt(W);
        CHECK((root * root - W).norm() <= 1e-8 * W.norm());
        CHECK((root - root.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((inv - oracle::inv_sqrt(W)).norm() <= 1e-8 * inv.norm());
    }

    Eigen::Matrix2d indefinite;
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(matrix_sqrt(indefinite), NumericError);
    Eigen::Matrix2d asym;
    asym << 1, 0.5, 0.2, 1;
    CHECK_THROWS_AS(matrix_sqrt(asym), ValidationError);
    CHECK_THROWS_AS(make_cov_matrix(Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix()), NumericError);
}

TEST_CASE("names") {
    for (auto k : {CovKind::OLS, CovKind::WLSv, CovKind::WLSs, CovKind::Sample, CovKind::Shrink}) {
        CHECK(cov_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(cov_kind_from_string("diag"), ValidationError);
    CHECK(needs_residuals(CovKind::Sample));
    CHECK_FALSE(needs_residuals(CovKind::WLSs));
}
