#include "rome/loss.hpp"

#include <algorithm>
#include <cmath>

#include "rome/errors.hpp"

namespace rome {

void validate(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::Huber:
            if (!(spec.k > 0.0) || !std::isfinite(spec.k)) {
                throw ValidationError("Huber threshold k must be positive and finite");
            }
            break;
        case LossKind::Lp:
            if (!(spec.p >= 1.0 && spec.p <= 2.0)) throw ValidationError("Lp exponent p must lie in [1, 2]");
            break;
        case LossKind::Quantile:
            if (!(spec.q > 0.0 && spec.q < 1.0)) throw ValidationError("quantile q must lie in (0, 1)");
            break;
        case LossKind::LAD:
            if (!(spec.sigma_hat > 0.0) || !std::isfinite(spec.sigma_hat)) {
                throw ValidationError("LAD needs a positive residual scale sigma_hat");
            }
            break;
        case LossKind::LS:
            break;
    }
}

double loss_value(const LossSpec& spec, double x) {
    const double a = std::abs(x);
    switch (spec.kind) {
        case LossKind::LS:
            return a * a;
        case LossKind::LAD:
            return a;
        case LossKind::Huber:
            return a <= spec.k ? 0.5 * a * a : spec.k * a - 0.5 * spec.k * spec.k;
        case LossKind::Lp:
            return std::pow(a, spec.p);
        case LossKind::Quantile:
            return x >= 0.0 ? spec.q * x : (spec.q - 1.0) * x;
    }
    return 0.0;
}

double loss_derivative(const LossSpec& spec, double abs_x) {
    const double a = std::abs(abs_x);
    switch (spec.kind) {
        case LossKind::LS:
            return a;
        case LossKind::LAD:
            return a > 0.0 ? 1.0 : 0.0;
        case LossKind::Huber:
            return std::min(a, spec.k);
        case LossKind::Lp:
            return a > 0.0 ? spec.p * std::pow(a, spec.p - 1.0) : 0.0;
        case LossKind::Quantile:
            // Right derivative; the left side has slope 1 - q.
            return a > 0.0 ? spec.q : 0.0;
    }
    return 0.0;
}

double linear_tilt(const LossSpec& spec) { return spec.kind == LossKind::Quantile ? spec.q - 0.5 : 0.0; }

double lqa_weight(const LossSpec& spec, double e, double varsigma) {
    const double a = std::abs(e);
    double slope = loss_derivative(spec, a);
    if (spec.kind == LossKind::LAD && a == 0.0) slope = 1.0;
    if (spec.kind == LossKind::Quantile) slope = 0.5;
    return (a + varsigma) / std::max(slope, varsigma);
}

LossSpec huber_realization(const LossSpec& spec) {
    if (spec.kind != LossKind::LAD) return spec;
    LossSpec out = LossSpec::huber(kLadHuberScale * spec.sigma_hat);
    out.sigma_hat = spec.sigma_hat;
    return out;
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::LS: return "ls";
        case LossKind::LAD: return "lad";
        case LossKind::Huber: return "huber";
        case LossKind::Lp: return "lp";
        case LossKind::Quantile: return "quantile";
    }
    return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "ls") return LossKind::LS;
    if (name == "lad") return LossKind::LAD;
    if (name == "huber") return LossKind::Huber;
    if (name == "lp") return LossKind::Lp;
    if (name == "quantile") return LossKind::Quantile;
    throw ValidationError("unknown loss '" + name + "' (expected ls|lad|huber|lp|quantile)");
}

}  // namespace rome
