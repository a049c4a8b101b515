#include "rome/reconciler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rome/errors.hpp"

namespace rome {

namespace {

void check_base(const BaseForecastSet& base, const Hierarchy& h) {
    if (base.yhat.rows() != static_cast<Eigen::Index>(h.size())) {
        throw ValidationError("base forecasts have " + std::to_string(base.yhat.rows()) + " series, hierarchy has " +
                              std::to_string(h.size()));
    }
    if (base.yhat.cols() < 1) throw ValidationError("base forecasts have no horizons");
    if (!base.yhat.allFinite()) throw ValidationError("base forecasts contain non-finite values");
}

void check_cov(const CovMatrix& W, const Hierarchy& h) {
    if (W.W.rows() != static_cast<Eigen::Index>(h.size()) || W.W.cols() != W.W.rows()) {
        throw ValidationError("covariance matrix does not match the hierarchy size");
    }
}

// Solves the small m* x m* system, rejecting (near-)singular matrices.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs, const std::string& what) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > 1e-14)) {
        std::ostringstream msg;
        msg << what << " is singular or not positive definite (rcond " << ldlt.rcond() << ")";
        throw NumericError(msg.str());
    }
    return ldlt.solve(rhs);
}

Eigen::VectorXd standardize(const CovMatrix& W, const Eigen::VectorXd& v) {
    if (W.diagonal) return W.inv_sqrt.diagonal().cwiseProduct(v);
    return W.inv_sqrt * v;
}

Eigen::VectorXd apply_sqrt(const CovMatrix& W, const Eigen::VectorXd& v) {
    if (W.diagonal) return W.sqrt.diagonal().cwiseProduct(v);
    return W.sqrt * v;
}

double objective_of(const LossSpec& loss, const Eigen::VectorXd& e) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) total += loss_value(loss, e(i));
    return total;
}

}  // namespace

void validate(const ReconcilerConfig& cfg, const Hierarchy& h) {
    if (!(cfg.varsigma > 0.0)) throw ValidationError("varsigma must be positive");
    if (!(cfg.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (cfg.omega_max < 1) throw ValidationError("omega_max must be at least 1");
    if (!(cfg.perturbation >= 0.0)) throw ValidationError("perturbation must be non-negative");
    if (cfg.init_vector) {
        if (cfg.init_vector->size() != static_cast<Eigen::Index>(h.size())) {
            throw ValidationError("initial vector length does not match the hierarchy");
        }
        const double resid = (h.constraint() * *cfg.init_vector).cwiseAbs().maxCoeff();
        if (resid > 1e-9 * (1.0 + cfg.init_vector->cwiseAbs().maxCoeff())) {
            throw ValidationError("initial vector is not coherent");
        }
    }
}

bool ReconcileResult::all_converged() const {
    return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

double coherence_residual(const Hierarchy& h, const Eigen::MatrixXd& y) {
    if (h.aggregate_count() == 0 || y.cols() == 0) return 0.0;
    return (h.constraint() * y).cwiseAbs().maxCoeff();
}

double unbiasedness_residual(const Hierarchy& h, const Eigen::MatrixXd& g) {
    const auto nb = static_cast<Eigen::Index>(h.bottom_count());
    return (g * h.summing() - Eigen::MatrixXd::Identity(nb, nb)).cwiseAbs().maxCoeff();
}

ReconcileResult reconcile_bottom_up(const BaseForecastSet& base, const Hierarchy& h) {
    check_base(base, h);
    const auto horizons = static_cast<std::size_t>(base.horizons());
    ReconcileResult out;
    out.ytilde = h.summing() * (h.selector() * base.yhat);
    // Bottom rows are copied, not recomputed, so they match the input bit for bit.
    out.ytilde.bottomRows(static_cast<Eigen::Index>(h.bottom_count())) =
        base.yhat.bottomRows(static_cast<Eigen::Index>(h.bottom_count()));
    out.iterations.assign(horizons, 1);
    out.converged.assign(horizons, true);
    out.objective.assign(horizons, 0.0);
    out.gmatrix.push_back(h.selector());
    return out;
}

Eigen::MatrixXd mint_gmatrix(const Hierarchy& h, const CovMatrix& W) {
    check_cov(W, h);
    const Eigen::MatrixXd& U = h.constraint();
    const Eigen::MatrixXd& J = h.selector();
    if (U.rows() == 0) return J;
    const Eigen::MatrixXd WUt = W.W * U.transpose();
    const Eigen::MatrixXd inner = U * WUt;
    const Eigen::MatrixXd x = solve_spd(inner, U, "MinT inner matrix U W U^T (design '" + W.label + "')");
    return J - J * WUt * x;
}

ReconcileResult reconcile_mint(const BaseForecastSet& base, const Hierarchy& h, const CovMatrix& W) {
    check_base(base, h);
    const Eigen::MatrixXd g = mint_gmatrix(h, W);
    const auto horizons = static_cast<std::size_t>(base.horizons());
    ReconcileResult out;
    out.ytilde = h.summing() * (g * base.yhat);
    out.iterations.assign(horizons, 1);
    out.converged.assign(horizons, true);
    out.objective.resize(horizons);
    const LossSpec ls = LossSpec::ls();
    for (std::size_t k = 0; k < horizons; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        out.objective[k] = rome_objective(W, ls, base.yhat.col(c), out.ytilde.col(c));
    }
    out.gmatrix.push_back(g);
    return out;
}

LossSpec effective_loss(const LossSpec& loss, LadMode mode) {
    if (loss.kind == LossKind::LAD && mode == LadMode::HuberApprox) return huber_realization(loss);
    return loss;
}

double rome_objective(const CovMatrix& W, const LossSpec& loss, const Eigen::VectorXd& yhat, const Eigen::VectorXd& y) {
    return objective_of(loss, standardize(W, y - yhat));
}

ReconcileResult reconcile_rome(const BaseForecastSet& base, const Hierarchy& h, const CovMatrix& W,
                               const LossSpec& loss, const ReconcilerConfig& cfg) {
    check_base(base, h);
    check_cov(W, h);
    validate(loss);
    validate(cfg, h);

    const LossSpec rho = effective_loss(loss, cfg.lad_mode);
    const double floor_add =
        (loss.kind == LossKind::LAD && cfg.lad_mode == LadMode::Perturbation) ? cfg.perturbation : 0.0;
    const double tilt = linear_tilt(rho);

    const Eigen::MatrixXd& U = h.constraint();
    const Eigen::MatrixXd B = W.diagonal ? Eigen::MatrixXd(U * W.sqrt.diagonal().asDiagonal()) : Eigen::MatrixXd(U * W.sqrt);
    const Eigen::Index n = static_cast<Eigen::Index>(h.size());
    const auto horizons = static_cast<std::size_t>(base.horizons());

    std::optional<Eigen::MatrixXd> mint_start;
    if (!cfg.init_vector && cfg.init == InitKind::BaseProjection) mint_start = h.summing() * mint_gmatrix(h, W);

    ReconcileResult out;
    out.ytilde.resize(n, base.horizons());
    out.iterations.assign(horizons, 0);
    out.converged.assign(horizons, false);
    out.objective.assign(horizons, 0.0);
    if (cfg.record_trace) out.objective_trace.resize(horizons);

    Eigen::VectorXd d(n);
    for (std::size_t k = 0; k < horizons; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        const Eigen::VectorXd yhat = base.yhat.col(col);
        const Eigen::VectorXd uy = U * yhat;

        Eigen::VectorXd y;
        if (cfg.init_vector) y = *cfg.init_vector;
        else if (mint_start) y = *mint_start * yhat;
        else y = Eigen::VectorXd::Zero(n);

        Eigen::VectorXd e = standardize(W, y - yhat);
        if (cfg.record_trace) out.objective_trace[k].push_back(objective_of(rho, e));

        int iter = 0;
        bool converged = false;
        while (iter < cfg.omega_max) {
            for (Eigen::Index i = 0; i < n; ++i) d(i) = lqa_weight(rho, e(i), cfg.varsigma) + floor_add;

            Eigen::VectorXd next;
            if (U.rows() == 0) {
                next = yhat;
            } else {
                const Eigen::MatrixXd bd = B * d.asDiagonal();
                Eigen::VectorXd rhs = uy;
                if (tilt != 0.0) rhs -= bd * Eigen::VectorXd::Constant(n, tilt);
                const Eigen::VectorXd lambda =
                    solve_spd(bd * B.transpose(), rhs, "RoME inner matrix U W^1/2 D W^1/2 U^T (design '" + W.label + "')");
                Eigen::VectorXd step = B.transpose() * lambda;
                if (tilt != 0.0) step.array() += tilt;
                next = yhat - apply_sqrt(W, d.cwiseProduct(step));
            }
            ++iter;
            const double change = (next - y).cwiseAbs().maxCoeff();
            y = std::move(next);
            e = standardize(W, y - yhat);
            if (cfg.record_trace) out.objective_trace[k].push_back(objective_of(rho, e));
            if (change < cfg.epsilon) {
                converged = true;
                break;
            }
        }

        out.ytilde.col(col) = y;
        out.iterations[k] = iter;
        out.converged[k] = converged;
        out.objective[k] = objective_of(rho, e);

        if (cfg.keep_gmatrix) {
            // G implied by the weights of the last update.
            const Eigen::MatrixXd M = W.sqrt * d.asDiagonal() * W.sqrt;
            const Eigen::MatrixXd MUt = M * U.transpose();
            const Eigen::MatrixXd x = solve_spd(U * MUt, U, "RoME inner matrix");
            out.gmatrix.push_back(h.selector() - h.selector() * MUt * x);
        }
    }
    return out;
}

Eigen::MatrixXd rome_gmatrix_step(const Hierarchy& h, const CovMatrix& W, const LossSpec& loss,
                                  const Eigen::MatrixXd& g_prev, const Eigen::VectorXd& yhat, double varsigma) {
    check_cov(W, h);
    validate(loss);
    const auto n = static_cast<Eigen::Index>(h.size());
    const auto nb = static_cast<Eigen::Index>(h.bottom_count());
    if (g_prev.rows() != nb || g_prev.cols() != n) throw ValidationError("G_prev must be n_b x n");
    if (yhat.size() != n) throw ValidationError("base vector length does not match the hierarchy");
    if (!(varsigma > 0.0)) throw ValidationError("varsigma must be positive");

    const LossSpec rho = effective_loss(loss, LadMode::HuberApprox);
    const Eigen::VectorXd adjust = standardize(W, h.summing() * (g_prev * yhat) - yhat);
    Eigen::VectorXd omega_root(n);
    for (Eigen::Index i = 0; i < n; ++i) omega_root(i) = std::sqrt(lqa_weight(rho, adjust(i), varsigma));

    const Eigen::MatrixXd V = omega_root.asDiagonal() * W.W * omega_root.asDiagonal();
    Eigen::LDLT<Eigen::MatrixXd> v_ldlt(V);
    if (v_ldlt.info() != Eigen::Success || !v_ldlt.isPositive()) throw NumericError("weighted covariance is not positive definite");
    const Eigen::MatrixXd vinv_s = v_ldlt.solve(h.summing());             // V^-1 S
    const Eigen::MatrixXd normal = h.summing().transpose() * vinv_s;       // S^T V^-1 S
    return solve_spd(normal, vinv_s.transpose(), "S^T V^-1 S");
}

double combination_weight_ls(CombinePattern pattern, int h, int H) {
    switch (pattern) {
        case CombinePattern::Average: return 0.5;
        case CombinePattern::OneWay: return 1.0 / (h + 1.0);
        case CombinePattern::TwoWay: return (H + 1.0 - h) / (H + 1.0);
    }
    return 0.5;
}

ReconcileResult combine_forecasts(const ReconcileResult& ls, const ReconcileResult& lad, CombinePattern pattern) {
    if (ls.ytilde.rows() != lad.ytilde.rows() || ls.ytilde.cols() != lad.ytilde.cols()) {
        throw ValidationError("combine_forecasts: LS and LAD results differ in shape");
    }
    const int H = static_cast<int>(ls.ytilde.cols());
    ReconcileResult out;
    out.ytilde.resize(ls.ytilde.rows(), ls.ytilde.cols());
    out.iterations.resize(static_cast<std::size_t>(H));
    out.converged.resize(static_cast<std::size_t>(H));
    out.objective.assign(static_cast<std::size_t>(H), std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < H; ++k) {
        const double w = combination_weight_ls(pattern, k + 1, H);
        out.ytilde.col(k) = w * ls.ytilde.col(k) + (1.0 - w) * lad.ytilde.col(k);
        const auto i = static_cast<std::size_t>(k);
        out.iterations[i] = std::max(ls.iterations.at(i), lad.iterations.at(i));
        out.converged[i] = ls.converged.at(i) && lad.converged.at(i);
        if (!ls.gmatrix.empty() && !lad.gmatrix.empty()) {
            const auto& gl = ls.gmatrix[std::min(i, ls.gmatrix.size() - 1)];
            const auto& gd = lad.gmatrix[std::min(i, lad.gmatrix.size() - 1)];
            out.gmatrix.push_back(w * gl + (1.0 - w) * gd);
        }
    }
    return out;
}

std::string to_string(CombinePattern p) {
    switch (p) {
        case CombinePattern::Average: return "average";
        case CombinePattern::OneWay: return "oneway";
        case CombinePattern::TwoWay: return "twoway";
    }
    return "?";
}

CombinePattern combine_pattern_from_string(const std::string& name) {
    if (name == "average") return CombinePattern::Average;
    if (name == "oneway") return CombinePattern::OneWay;
    if (name == "twoway") return CombinePattern::TwoWay;
    throw ValidationError("unknown combination pattern '" + name + "' (expected average|oneway|twoway)");
}

}  // namespace rome
