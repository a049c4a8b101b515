#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rome/covariance.hpp"
#include "rome/hierarchy.hpp"
#include "rome/loss.hpp"
#include "rome/reconciler.hpp"
#include "rome/report.hpp"

namespace rome {

enum class ErrorKind { Gaussian, MixtureNormal, StudentT, Cauchy };

struct ErrorSpec {
    ErrorKind kind = ErrorKind::Gaussian;
    double mix_weight = 0.9;  // probability of the narrow component
    double mix_sd_narrow = 1.0;
    double mix_sd_wide = 3.0;
    double dof = 3.0;
    double location = 0.0;
    double scale = 1.0;

    static ErrorSpec of(ErrorKind kind) { return ErrorSpec{kind}; }
};

double draw_error(const ErrorSpec& spec, std::mt19937_64& rng);
std::string to_string(ErrorKind kind);
ErrorKind error_kind_from_string(const std::string& name);

/// Bottom-level AR(1) data generator for one hierarchy.
struct ScenarioSpec {
    HierarchySpec hierarchy;
    std::vector<double> alpha;
    std::vector<double> sigma;
    std::vector<ErrorSpec> errors;  // one per bottom series
    double corr_rho = 0.0;          // Gaussian block correlation rho^|i-i'|
    int t_total = 192;
    int t_train = 180;
    int horizon = 12;
    int burn_in = 200;
};

void validate(const ScenarioSpec& spec);

/// Observations for every series; columns are time, the first `t_train` are training data.
struct SimPanel {
    Eigen::MatrixXd y;
    int t_train = 0;
    int horizon = 0;

    Eigen::MatrixXd train() const { return y.leftCols(t_train); }
    Eigen::MatrixXd test() const { return y.middleCols(t_train, horizon); }
};

SimPanel generate_panel(const ScenarioSpec& spec, const Hierarchy& h, std::uint64_t rep_seed);

/// AR(1)-with-intercept fitted by conditional least squares.
struct BaseFit {
    Eigen::VectorXd forecasts;  // horizons 1..H
    Eigen::VectorXd residuals;  // one-step in-sample errors, length T-1
    double intercept = 0.0;
    double slope = 0.0;
    bool clamped = false;
};

inline constexpr double kUnitRootClamp = 0.999;

BaseFit fit_base_forecaster(std::span<const double> train, int horizon);

/// Fits every series of `train` and stacks forecasts (n x H) and residuals.
BaseForecastSet fit_base_forecasts(const Eigen::MatrixXd& train, int horizon, int* clamped = nullptr);

/// Pooled root-mean-square of all residuals.
double pooled_sigma(const ResidualPanel& panel);

/// The two-level tree with 2 and 4 leaves under the middle nodes (n = 9).
HierarchySpec figure1_hierarchy();

// ---------------------------------------------------------------------------
// Experiments

enum class Design { NonGaussian, Efficiency, Proportion, Correlation, Complexity };

std::string to_string(Design d);
Design design_from_string(const std::string& name);

struct ExperimentOverrides {
    std::optional<std::string> dist;
    std::optional<double> sigma;
    std::optional<int> bottom;
    std::optional<double> proportion;
    std::optional<double> rho;
};

struct MethodSpec {
    enum class Kind { BottomUp, Rome, Combine };
    Kind kind = Kind::Rome;
    LossKind loss = LossKind::LS;
    CovKind cov = CovKind::OLS;
    CombinePattern pattern = CombinePattern::Average;

    std::string method_label() const;
    std::string loss_label() const;
    std::string cov_label() const;
};

/// Parses a comma list of bu | all | combine | <loss> | <loss>-<cov> | combine-<pattern>[-<cov>].
/// An empty list selects bottom-up plus every loss x covariance pair of the design.
std::vector<MethodSpec> parse_methods(const std::string& list, Design design);

struct ExperimentConfig {
    Design design = Design::NonGaussian;
    ExperimentOverrides overrides;
    int reps = 100;
    std::uint64_t seed = 1;
    std::vector<MethodSpec> methods;  // empty = defaults
    unsigned threads = 1;
    /// true: average per-replication percentage changes; false: change of the averaged RMSE.
    bool mean_of_pct = true;
    ReconcilerConfig reconciler;
};

struct EvalGroup {
    std::string name;
    std::vector<std::size_t> series;
};

/// One grid point of a design.
struct ExperimentCell {
    std::string params;
    double value = 0.0;
};

std::vector<ExperimentCell> experiment_cells(const ExperimentConfig& cfg);

/// Everything needed to score methods on one simulated replication.
struct Replication {
    Hierarchy hierarchy;
    ScenarioSpec scenario;
    SimPanel panel;
    BaseForecastSet base;
    Eigen::MatrixXd actuals;
    double sigma_hat = 1.0;
    std::vector<EvalGroup> groups;
    std::uint64_t seed = 0;
    int clamped = 0;  // AR fits held at the unit-root clamp
};

Replication prepare_replication(const ExperimentConfig& cfg, std::size_t cell, std::size_t rep);

/// Loss spec used in experiments: Huber k = 1.345 sigma_hat, LAD scaled by sigma_hat.
LossSpec experiment_loss(LossKind kind, double sigma_hat);

/// Reconciles a replication's base forecasts with `method`.
ReconcileResult run_method(const MethodSpec& method, const Replication& rep, const ReconcilerConfig& cfg);

/// Runs the design and aggregates percentage changes against the base forecasts.
Report run_experiment(const ExperimentConfig& cfg);

/// Times every loss x covariance pair on one replication of `scenario`
/// ("fig1" or a design name).
Report run_bench(const std::string& scenario, int iters, std::uint64_t seed);

std::vector<int> experiment_windows(int horizon);

}  // namespace rome
