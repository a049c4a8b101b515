#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace rome {

/// Group of series and horizon window 1..horizons.
struct EvalWindow {
    std::vector<std::size_t> group;
    int horizons = 1;
};

/// sqrt(mean over the group and horizons 1..H' of squared errors).
double rmse(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals, const EvalWindow& window);

/// 100 * (method - base) / base; negative means the method improves on the base.
double pct_change(double rmse_method, double rmse_base);

}  // namespace rome
