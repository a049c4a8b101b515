#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "rome/hierarchy.hpp"

namespace rome {

/// One-step in-sample base-forecast residuals, series x time.
struct ResidualPanel {
    Eigen::MatrixXd residuals;

    Eigen::Index series() const { return residuals.rows(); }
    Eigen::Index samples() const { return residuals.cols(); }
};

/// Throws ValidationError unless T >= 2, all entries finite and (when given) rows == n.
void validate(const ResidualPanel& panel, Eigen::Index expected_series = -1);

enum class CovKind { OLS, WLSv, WLSs, Sample, Shrink };

struct CovarianceDesign {
    CovKind kind = CovKind::OLS;
    std::optional<double> lambda;  // Shrink only; estimated when empty
    double kh = 1.0;
};

/// Realized W together with its symmetric square root and inverse root.
struct CovMatrix {
    Eigen::MatrixXd W;
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
    bool diagonal = false;
    std::string label = "custom";
    double shrink_lambda = 0.0;  // intensity actually used (Shrink only)
};

/// Uncentered second moment T^-1 sum_t e_t e_t^T.
Eigen::MatrixXd estimate_w1(const ResidualPanel& panel);

/// Shrinkage intensity towards the diagonal, from the scale/location invariant
/// correlation estimator; clamped to [0, 1].
double shrinkage_lambda(const ResidualPanel& panel);

/// Symmetric square root and its inverse by eigen-decomposition. Eigenvalues
/// below 1e-10 * max(lambda_max, 1) raise NumericError.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> matrix_sqrt(const Eigen::MatrixXd& W);

/// Builds a CovMatrix from an explicit SPD matrix.
CovMatrix make_cov_matrix(const Eigen::MatrixXd& W, const std::string& label = "custom");

/// W_h for the given design. `panel` may be null for OLS and WLSs.
CovMatrix realize_design(const CovarianceDesign& design, const ResidualPanel* panel, const Hierarchy& h);

inline constexpr double kEigenFloor = 1e-10;

std::string to_string(CovKind kind);
CovKind cov_kind_from_string(const std::string& name);
bool needs_residuals(CovKind kind);

}  // namespace rome
