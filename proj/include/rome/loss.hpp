#pragma once

#include <string>

namespace rome {

enum class LossKind { LS, LAD, Huber, Lp, Quantile };

/// Scale multiplier applied to sigma_hat for the default Huber threshold.
inline constexpr double kHuberScale = 1.345;
/// Scale multiplier applied to sigma_hat when LAD is realized as Huber.
inline constexpr double kLadHuberScale = 1e-4;

/// A convex loss rho(|x|) and its parameters.
struct LossSpec {
    LossKind kind = LossKind::LS;
    double k = 1.0;      // Huber threshold
    double p = 2.0;      // Lp exponent, in [1, 2]
    double q = 0.5;      // quantile level, in (0, 1)
    double sigma_hat = 1.0;

    static LossSpec ls() { return {}; }
    static LossSpec lad(double sigma_hat = 1.0) { return {LossKind::LAD, 1.0, 1.0, 0.5, sigma_hat}; }
    static LossSpec huber(double k) { return {LossKind::Huber, k, 2.0, 0.5, 1.0}; }
    /// Huber with k = 1.345 * sigma_hat.
    static LossSpec huber_scaled(double sigma_hat) {
        return {LossKind::Huber, kHuberScale * sigma_hat, 2.0, 0.5, sigma_hat};
    }
    static LossSpec lp(double p) { return {LossKind::Lp, 1.0, p, 0.5, 1.0}; }
    static LossSpec quantile(double q) { return {LossKind::Quantile, 1.0, 2.0, q, 1.0}; }
};

/// Throws ValidationError if the parameters are out of range.
void validate(const LossSpec& spec);

/// rho(|x|). Quantile is the asymmetric check loss and uses the sign of x.
double loss_value(const LossSpec& spec, double x);

/// rho'(|x|) for a magnitude |x| >= 0 (almost-everywhere derivative).
double loss_derivative(const LossSpec& spec, double abs_x);

/// Diagonal entry of the LQA weighting matrix: (|e| + varsigma) / max(rho'(|e|), varsigma).
/// For LAD the derivative at the origin is taken as its right limit, 1.
/// Quantile loss is split as 0.5|x| + (q - 0.5)x; the weight comes from the
/// symmetric part and the tilt enters the update as a linear term.
double lqa_weight(const LossSpec& spec, double e, double varsigma);

/// Coefficient of the linear part of rho (q - 0.5 for Quantile, 0 otherwise).
double linear_tilt(const LossSpec& spec);

/// The loss the iteration actually minimizes: LAD becomes Huber with
/// k = 1e-4 * sigma_hat, everything else is returned unchanged.
LossSpec huber_realization(const LossSpec& spec);

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

}  // namespace rome
