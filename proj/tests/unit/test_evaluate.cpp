#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "rome/errors.hpp"
#include "rome/evaluate.hpp"

using namespace rome;
using doctest::Approx;

TEST_CASE("rmse examples") {
    Eigen::MatrixXd a(2, 3);
    a << 1, 2, 3, 4, 5, 6;
    CHECK(rmse(a, a, {{0, 1}, 3}) == 0.0);

    Eigen::MatrixXd f = a.array() + 3.0;
    CHECK(rmse(f, a, {{0, 1}, 3}) == Approx(3.0));

    Eigen::MatrixXd g = a;
    g(0, 0) += 1.0;
    g(1, 0) -= 1.0;
    CHECK(rmse(g, a, {{0, 1}, 1}) == Approx(1.0));
    CHECK(rmse(g, a, {{0}, 2}) == Approx(std::sqrt(0.5)));

    Eigen::MatrixXd one(1, 2);
    one << 2.0, 0.0;
    CHECK(rmse(one, Eigen::MatrixXd::Zero(1, 2), {{0}, 1}) == Approx(2.0));
    one << 1.0, 1.0;
    CHECK(rmse(one, Eigen::MatrixXd::Zero(1, 2), {{0}, 2}) == Approx(1.0));
    one << 1.0, -1.0;
    CHECK(rmse(one * std::sqrt(2.0), Eigen::MatrixXd::Zero(1, 2), {{0}, 2}) == Approx(std::sqrt(2.0)));
}

TEST_CASE("rmse invariances") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    Eigen::MatrixXd f(5, 12), a(5, 12);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        f(i) = z(rng);
        a(i) = z(rng);
    }
    const EvalWindow w{{0, 2, 4}, 6};
    const double base = rmse(f, a, w);
    CHECK(rmse(a, f, w) == Approx(base));
    CHECK(rmse(f.array() + 4.0, a.array() + 4.0, w) == Approx(base));
    CHECK(rmse(3.0 * f, 3.0 * a, w) == Approx(3.0 * base));
    CHECK(rmse(f, a, {{4, 0, 2}, 6}) == Approx(base));
    // Columns past the window do not matter.
    Eigen::MatrixXd f2 = f;
    f2.rightCols(6).setConstant(1e6);
    CHECK(rmse(f2, a, w) == base);
}

TEST_CASE("pct_change") {
    CHECK(pct_change(0.9, 1.0) == Approx(-10.0));
    CHECK(pct_change(1.0, 1.0) == 0.0);
    CHECK(pct_change(3.0, 2.0) == Approx(50.0));
    CHECK_THROWS_AS(pct_change(1.0, 0.0), ValidationError);
}

TEST_CASE("rmse validation") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(rmse(a, Eigen::MatrixXd::Zero(2, 2), {{0}, 1}), ValidationError);
    CHECK_THROWS_AS(rmse(a, a, {{}, 1}), ValidationError);
    CHECK_THROWS_AS(rmse(a, a, {{2}, 1}), ValidationError);
    CHECK_THROWS_AS(rmse(a, a, {{0}, 0}), ValidationError);
    CHECK_THROWS_AS(rmse(a, a, {{0}, 4}), ValidationError);
}
