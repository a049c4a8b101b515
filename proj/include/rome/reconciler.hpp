#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rome/covariance.hpp"
#include "rome/hierarchy.hpp"
#include "rome/loss.hpp"

namespace rome {

/// Base forecasts (series x horizon) with optional in-sample residuals.
struct BaseForecastSet {
    Eigen::MatrixXd yhat;
    std::optional<ResidualPanel> residuals;

    Eigen::Index horizons() const { return yhat.cols(); }
};

enum class LadMode { HuberApprox, Perturbation };
enum class InitKind { Zero, BaseProjection };

struct ReconcilerConfig {
    double varsigma = 1e-8;
    double epsilon = 1e-4;
    int omega_max = 1000;
    InitKind init = InitKind::Zero;
    /// Explicit coherent starting point; overrides `init` when set.
    std::optional<Eigen::VectorXd> init_vector;
    LadMode lad_mode = LadMode::HuberApprox;
    /// Additive floor on the weighting matrix in LadMode::Perturbation.
    double perturbation = 1e-8;
    /// Keep the objective after every iteration (index 0 is the start point).
    bool record_trace = false;
    /// Keep the per-horizon reconciliation matrix implied by the final weights.
    bool keep_gmatrix = false;
};

void validate(const ReconcilerConfig& cfg, const Hierarchy& h);

struct ReconcileResult {
    Eigen::MatrixXd ytilde;
    std::vector<int> iterations;
    std::vector<bool> converged;
    std::vector<double> objective;
    /// One matrix shared by all horizons (BU, MinT) or one per horizon (RoME).
    std::vector<Eigen::MatrixXd> gmatrix;
    std::vector<std::vector<double>> objective_trace;

    bool all_converged() const;
};

/// max_h ||U y~(:,h)||_inf.
double coherence_residual(const Hierarchy& h, const Eigen::MatrixXd& y);
/// ||G S - I||_inf (max-abs entry).
double unbiasedness_residual(const Hierarchy& h, const Eigen::MatrixXd& g);

/// y~ = S J y^.
ReconcileResult reconcile_bottom_up(const BaseForecastSet& base, const Hierarchy& h);

/// G = J - J W U^T (U W U^T)^-1 U with U the m* x n constraint matrix.
Eigen::MatrixXd mint_gmatrix(const Hierarchy& h, const CovMatrix& W);

ReconcileResult reconcile_mint(const BaseForecastSet& base, const Hierarchy& h, const CovMatrix& W);

/// Robust M-estimation reconciliation by the perturbed LQA iteration, each
/// horizon solved independently.
ReconcileResult reconcile_rome(const BaseForecastSet& base, const Hierarchy& h, const CovMatrix& W,
                               const LossSpec& loss, const ReconcilerConfig& cfg = {});

/// Sum_i rho(|e*_i|) with e* = W^-1/2 (y - y^), for the loss the iteration minimizes.
double rome_objective(const CovMatrix& W, const LossSpec& loss, const Eigen::VectorXd& yhat, const Eigen::VectorXd& y);

/// Loss actually minimized for `loss` under `mode` (LAD -> small-k Huber in HuberApprox mode).
LossSpec effective_loss(const LossSpec& loss, LadMode mode);

/// One step of the trace-minimization form of the iteration:
/// G_next = (S^T V^-1 S)^-1 S^T V^-1 with V = Omega^1/2 W Omega^1/2, where Omega
/// holds the LQA weighting entries evaluated at the standardized adjustment
/// W^-1/2 (S G_prev y^ - y^).
Eigen::MatrixXd rome_gmatrix_step(const Hierarchy& h, const CovMatrix& W, const LossSpec& loss,
                                  const Eigen::MatrixXd& g_prev, const Eigen::VectorXd& yhat,
                                  double varsigma = 1e-8);

enum class CombinePattern { Average, OneWay, TwoWay };

/// LS weight for horizon h (1-based) out of H.
double combination_weight_ls(CombinePattern pattern, int h, int H);

ReconcileResult combine_forecasts(const ReconcileResult& ls, const ReconcileResult& lad, CombinePattern pattern);

std::string to_string(CombinePattern p);
CombinePattern combine_pattern_from_string(const std::string& name);

}  // namespace rome
