#include "rome/evaluate.hpp"

#include <cmath>

#include "rome/errors.hpp"

namespace rome {

double rmse(const Eigen::MatrixXd& forecasts, const Eigen::MatrixXd& actuals, const EvalWindow& window) {
    if (forecasts.rows() != actuals.rows() || forecasts.cols() != actuals.cols()) {
        throw ValidationError("rmse: forecasts and actuals differ in shape");
    }
    if (window.group.empty()) throw ValidationError("rmse: empty series group");
    if (window.horizons < 1 || window.horizons > forecasts.cols()) {
        throw ValidationError("rmse: window 1.." + std::to_string(window.horizons) + " outside 1.." +
                              std::to_string(forecasts.cols()));
    }
    double sum = 0.0;
    for (std::size_t i : window.group) {
        if (i >= static_cast<std::size_t>(forecasts.rows())) throw ValidationError("rmse: series index out of range");
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index k = 0; k < window.horizons; ++k) {
            const double err = actuals(r, k) - forecasts(r, k);
            sum += err * err;
        }
    }
    return std::sqrt(sum / (static_cast<double>(window.group.size()) * window.horizons));
}

double pct_change(double rmse_method, double rmse_base) {
    if (!(rmse_base > 0.0)) throw ValidationError("pct_change: base RMSE must be positive");
    return (rmse_method - rmse_base) / rmse_base * 100.0;
}

}  // namespace rome
