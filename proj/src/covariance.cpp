#include "rome/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rome/errors.hpp"

namespace rome {

void validate(const ResidualPanel& panel, Eigen::Index expected_series) {
    if (panel.samples() < 2) throw ValidationError("residual panel needs at least 2 time points");
    if (expected_series >= 0 && panel.series() != expected_series) {
        throw ValidationError("residual panel has " + std::to_string(panel.series()) +
                              " series, hierarchy has " + std::to_string(expected_series));
    }
    if (!panel.residuals.allFinite()) throw ValidationError("residual panel contains non-finite values");
}

Eigen::MatrixXd estimate_w1(const ResidualPanel& panel) {
    validate(panel);
    const auto& e = panel.residuals;
    Eigen::MatrixXd w = (e * e.transpose()) / static_cast<double>(e.cols());
    return w.selfadjointView<Eigen::Lower>();
}

double shrinkage_lambda(const ResidualPanel& panel) {
    validate(panel);
    const Eigen::Index n = panel.series();
    const Eigen::Index t = panel.samples();
    if (t < 3) throw ValidationError("shrinkage estimation needs at least 3 time points");
    if (n < 2) return 1.0;

    const auto td = static_cast<double>(t);
    const Eigen::VectorXd second = panel.residuals.rowwise().squaredNorm() / td;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(second(i) > 0.0)) {
            throw ValidationError("degenerate correlation: series " + std::to_string(i) + " has zero variance");
        }
    }
    const Eigen::VectorXd inv_sd = second.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd xs = inv_sd.asDiagonal() * panel.residuals;
    const Eigen::MatrixXd xs2 = xs.cwiseAbs2();

    const Eigen::MatrixXd cross = xs * xs.transpose();     // T * r_ij
    const Eigen::MatrixXd cross2 = xs2 * xs2.transpose();  // sum_t x_i^2 x_j^2

    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = cross(i, j) / td;
            num += (cross2(i, j) - cross(i, j) * cross(i, j) / td) / (td * (td - 1.0));
            den += r * r;
        }
    }
    if (den <= 0.0) return 1.0;
    return std::clamp(num / den, 0.0, 1.0);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> matrix_sqrt(const Eigen::MatrixXd& W) {
    if (W.rows() != W.cols() || W.rows() == 0) throw ValidationError("matrix_sqrt needs a non-empty square matrix");
    if (!W.allFinite()) throw ValidationError("matrix_sqrt: non-finite entries");
    const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
    if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ValidationError("matrix_sqrt: matrix is not symmetric");
    }

    const bool diagonal = (W - Eigen::MatrixXd(W.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    if (diagonal) {
        const Eigen::VectorXd d = W.diagonal();
        const double floor = kEigenFloor * std::max(1.0, d.maxCoeff());
        if (d.minCoeff() < floor) {
            std::ostringstream msg;
            msg << "matrix is not positive definite (smallest eigenvalue " << d.minCoeff() << ")";
            throw NumericError(msg.str());
        }
        return {Eigen::MatrixXd(d.cwiseSqrt().asDiagonal()), Eigen::MatrixXd(d.cwiseSqrt().cwiseInverse().asDiagonal())};
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W);
    if (eig.info() != Eigen::Success) throw NumericError("eigen-decomposition failed");
    const Eigen::VectorXd& vals = eig.eigenvalues();
    const double floor = kEigenFloor * std::max(1.0, vals.maxCoeff());
    if (vals.minCoeff() < floor) {
        std::ostringstream msg;
        msg << "matrix is not positive definite (smallest eigenvalue " << vals.minCoeff() << ", floor " << floor << ")";
        throw NumericError(msg.str());
    }
    const Eigen::MatrixXd& q = eig.eigenvectors();
    Eigen::MatrixXd root = q * vals.cwiseSqrt().asDiagonal() * q.transpose();
    Eigen::MatrixXd inv_root = q * vals.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
    // Symmetrize away rounding so downstream products stay symmetric.
    root = 0.5 * (root + root.transpose()).eval();
    inv_root = 0.5 * (inv_root + inv_root.transpose()).eval();
    return {std::move(root), std::move(inv_root)};
}

CovMatrix make_cov_matrix(const Eigen::MatrixXd& W, const std::string& label) {
    CovMatrix out;
    out.W = W;
    out.label = label;
    try {
        auto [root, inv_root] = matrix_sqrt(W);
        out.sqrt = std::move(root);
        out.inv_sqrt = std::move(inv_root);
    } catch (const NumericError& e) {
        throw NumericError("covariance design '" + label + "': " + e.what());
    }
    out.diagonal = (W - Eigen::MatrixXd(W.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    return out;
}

CovMatrix realize_design(const CovarianceDesign& design, const ResidualPanel* panel, const Hierarchy& h) {
    if (!(design.kh > 0.0) || !std::isfinite(design.kh)) throw ValidationError("k_h must be positive");
    if (design.lambda && !(*design.lambda >= 0.0 && *design.lambda <= 1.0)) {
        throw ValidationError("shrinkage lambda must lie in [0, 1]");
    }
    const auto n = static_cast<Eigen::Index>(h.size());
    const std::string label = to_string(design.kind);
    if (needs_residuals(design.kind)) {
        if (panel == nullptr) {
            throw ValidationError("covariance design '" + label + "' requires in-sample residuals (W1 estimate)");
        }
        validate(*panel, n);
    }

    Eigen::MatrixXd W;
    double lambda = 0.0;
    switch (design.kind) {
        case CovKind::OLS:
            W = Eigen::MatrixXd::Identity(n, n);
            break;
        case CovKind::WLSv:
            W = estimate_w1(*panel).diagonal().asDiagonal();
            break;
        case CovKind::WLSs:
            W = (h.summing() * Eigen::VectorXd::Ones(h.summing().cols())).asDiagonal();
            break;
        case CovKind::Sample:
            W = estimate_w1(*panel);
            break;
        case CovKind::Shrink: {
            const Eigen::MatrixXd w1 = estimate_w1(*panel);
            lambda = design.lambda ? *design.lambda : shrinkage_lambda(*panel);
            W = lambda * Eigen::MatrixXd(w1.diagonal().asDiagonal()) + (1.0 - lambda) * w1;
            break;
        }
    }
    W *= design.kh;
    CovMatrix out = make_cov_matrix(W, label);
    out.shrink_lambda = lambda;
    return out;
}

std::string to_string(CovKind kind) {
    switch (kind) {
        case CovKind::OLS: return "ols";
        case CovKind::WLSv: return "wlsv";
        case CovKind::WLSs: return "wlss";
        case CovKind::Sample: return "sample";
        case CovKind::Shrink: return "shrink";
    }
    return "?";
}

CovKind cov_kind_from_string(const std::string& name) {
    if (name == "ols") return CovKind::OLS;
    if (name == "wlsv") return CovKind::WLSv;
    if (name == "wlss") return CovKind::WLSs;
    if (name == "sample") return CovKind::Sample;
    if (name == "shrink") return CovKind::Shrink;
    throw ValidationError("unknown covariance design '" + name + "' (expected ols|wlsv|wlss|sample|shrink)");
}

bool needs_residuals(CovKind kind) {
    return kind == CovKind::WLSv || kind == CovKind::Sample || kind == CovKind::Shrink;
}

}  // namespace rome
