#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "rome/errors.hpp"
#include "rome/loss.hpp"

using namespace rome;
using doctest::Approx;

namespace {

std::vector<LossSpec> catalog() {
    return {LossSpec::ls(), LossSpec::lad(), LossSpec::huber(1.0), LossSpec::huber(0.3), LossSpec::lp(1.5),
            LossSpec::lp(1.0), LossSpec::quantile(0.3)};
}

}  // namespace

TEST_CASE("loss values") {
    CHECK(loss_value(LossSpec::huber(1.0), 3.0) == Approx(2.5));
    CHECK(loss_value(LossSpec::huber(1.0), -0.5) == Approx(0.125));
    CHECK(loss_value(LossSpec::ls(), 2.0) == 4.0);
    CHECK(loss_value(LossSpec::lad(), -2.5) == 2.5);
    CHECK(loss_value(LossSpec::lp(1.5), 4.0) == Approx(8.0));
    CHECK(loss_value(LossSpec::quantile(0.3), 2.0) == Approx(0.6));
    CHECK(loss_value(LossSpec::quantile(0.3), -2.0) == Approx(1.4));
    for (const auto& s : catalog()) CHECK(loss_value(s, 0.0) == 0.0);
}

TEST_CASE("loss derivatives") {
    CHECK(loss_derivative(LossSpec::huber(1.345), 2.0) == 1.345);
    CHECK(loss_derivative(LossSpec::huber(1.345), 0.5) == 0.5);
    CHECK(loss_derivative(LossSpec::ls(), 0.7) == 0.7);
    CHECK(loss_derivative(LossSpec::lad(), 0.0) == 0.0);
    CHECK(loss_derivative(LossSpec::lad(), 3.0) == 1.0);
    CHECK(loss_derivative(LossSpec::lp(1.5), 4.0) == Approx(3.0));
}

TEST_CASE("shape: even, nonnegative, convex on a grid") {
    for (const auto& s : catalog()) {
        const bool symmetric = s.kind != LossKind::Quantile;
        for (double x = -5.0; x <= 5.0; x += 0.125) {
            CHECK(loss_value(s, x) >= 0.0);
            if (symmetric) CHECK(loss_value(s, x) == loss_value(s, -x));
            const double d = 0.0625;
            CHECK(loss_value(s, x - d) + loss_value(s, x + d) - 2.0 * loss_value(s, x) >= -1e-12);
        }
    }
}

TEST_CASE("derivative is monotone and bounded for Huber") {
    for (const auto& s : catalog()) {
        double prev = 0.0;
        for (double a = 0.0; a <= 6.0; a += 0.05) {
            const double d = loss_derivative(s, a);
            CHECK(d >= prev - 1e-15);
            prev = d;
        }
    }
    for (double a = 0.0; a < 10.0; a += 0.3) CHECK(loss_derivative(LossSpec::huber(0.7), a) <= 0.7);
}

TEST_CASE("finite-difference check of the derivative") {
    const double delta = 1e-5;
    const std::vector<double> points = {0.05, 0.4, 0.9, 1.7, 3.2};
    for (const auto& s : catalog()) {
        for (double a : points) {
            if (s.kind == LossKind::Huber && std::abs(a - s.k) < 2 * delta) continue;
            const double fd = (loss_value(s, a + delta) - loss_value(s, a - delta)) / (2 * delta);
            // LS is |x|^2 with the derivative convention rho'(|x|) = |x|, i.e. half the slope.
            const double scale = s.kind == LossKind::LS ? 0.5 : 1.0;
            CHECK(std::abs(loss_derivative(s, a) - scale * fd) <= 1e-6);
        }
    }
}

TEST_CASE("lqa weights") {
    const double vs = 1e-8;
    CHECK(lqa_weight(LossSpec::ls(), 0.5, vs) == Approx(1.0 + 2e-8).epsilon(1e-12));
    CHECK(lqa_weight(LossSpec::ls(), 0.0, vs) == 1.0);
    CHECK(lqa_weight(LossSpec::huber(1.0), 4.0, vs) == Approx(4.00000001).epsilon(1e-12));
    CHECK(lqa_weight(LossSpec::lad(), 0.0, vs) == Approx(1e-8));
    for (const auto& s : catalog()) {
        for (double e : {-3.0, -1e-12, 0.0, 1e-9, 0.2, 50.0}) {
            const double w = lqa_weight(s, e, vs);
            CHECK(std::isfinite(w));
            CHECK(w > 0.0);
        }
    }
}

TEST_CASE("lad realization and validation") {
    const LossSpec h = huber_realization(LossSpec::lad(2.0));
    CHECK(h.kind == LossKind::Huber);
    CHECK(h.k == Approx(2e-4));
    CHECK(huber_realization(LossSpec::huber(3.0)).k == 3.0);
    CHECK(linear_tilt(LossSpec::quantile(0.8)) == Approx(0.3));
    CHECK(linear_tilt(LossSpec::ls()) == 0.0);

    CHECK_THROWS_AS(validate(LossSpec::huber(0.0)), ValidationError);
    CHECK_THROWS_AS(validate(LossSpec::lp(2.5)), ValidationError);
    CHECK_THROWS_AS(validate(LossSpec::lp(0.5)), ValidationError);
    CHECK_THROWS_AS(validate(LossSpec::quantile(1.0)), ValidationError);
    CHECK_THROWS_AS(validate(LossSpec::lad(0.0)), ValidationError);
    CHECK_NOTHROW(validate(LossSpec::huber_scaled(0.5)));
    CHECK(LossSpec::huber_scaled(2.0).k == Approx(2.69));
}

TEST_CASE("names") {
    for (auto k : {LossKind::LS, LossKind::LAD, LossKind::Huber, LossKind::Lp, LossKind::Quantile}) {
        CHECK(loss_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(loss_kind_from_string("l3"), ValidationError);
}
