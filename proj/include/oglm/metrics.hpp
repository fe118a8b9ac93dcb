#ifndef OGLM_METRICS_HPP
#define OGLM_METRICS_HPP

#include <cmath>
#include <vector>

#include "oglm/types.hpp"

namespace oglm {

// Per-coordinate root mean squared error across replications.
inline VectorXd rmse(const std::vector<VectorXd>& estimates, const VectorXd& beta_true) {
    if (estimates.empty()) throw ShapeError("rmse: no estimates");
    const Eigen::Index d = beta_true.size();
    VectorXd sq = VectorXd::Zero(d);
    for (const auto& est : estimates) {
        if (est.size() != d) throw ShapeError("rmse: estimate dimension mismatch");
        sq += (est - beta_true).cwiseAbs2();
    }
    return (sq / static_cast<double>(estimates.size())).cwiseSqrt();
}

// Average of the per-coordinate RMSEs.
inline double armse(const VectorXd& rmse_vec) { return rmse_vec.mean(); }

inline double armse(const std::vector<VectorXd>& estimates, const VectorXd& beta_true) {
    return armse(rmse(estimates, beta_true));
}

// Empirical rejection probability: the mean of the rejection indicators.
inline double erp(const std::vector<bool>& indicators) {
    if (indicators.empty()) throw ShapeError("erp: no indicators");
    std::size_t hits = 0;
    for (bool b : indicators) hits += b ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(indicators.size());
}

}  // namespace oglm

#endif  // OGLM_METRICS_HPP
