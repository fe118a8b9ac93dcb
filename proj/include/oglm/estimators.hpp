#ifndef OGLM_ESTIMATORS_HPP
#define OGLM_ESTIMATORS_HPP

#include <string>
#include <utility>
#include <vector>

#include "oglm/glm.hpp"
#include "oglm/types.hpp"

namespace oglm {

enum class OneShotWeights : std::uint8_t { Equal, BySize };

// MLE on the pooled pilot rows held by the master.
inline EstimateResult pilot_estimate(Family family, const DataShard& pilot_rows,
                                     double tol = kDefaultTol, int max_iter = kDefaultMaxIter) {
    pilot_rows.check();
    if (pilot_rows.rows() == 0) throw PilotTooSmallError("pilot_estimate: empty pilot sample");
    if (pilot_rows.rows() < 5 * pilot_rows.dim())
        throw PilotTooSmallError("pilot_estimate: fewer than 5d pilot rows (" +
                                 std::to_string(pilot_rows.rows()) + " for d=" +
                                 std::to_string(pilot_rows.dim()) + ")");
    EstimateResult r = fit_mle(family, pilot_rows, VectorXd(), tol, max_iter);
    r.kind = EstimatorKind::Pilot;
    return r;
}

// Single undamped Newton step at the pilot point using the full-data
// aggregate. The log-likelihood at the updated point is not known here; it
// costs one extra broadcast and is filled in by the caller when needed.
inline EstimateResult one_step_estimate(const VectorXd& pilot_beta,
                                        const DerivativeBundle& aggregate) {
    if (pilot_beta.size() != aggregate.score.size())
        throw ShapeError("one_step_estimate: dimension mismatch");
    const VectorXd step = chol_solve(aggregate.info, aggregate.score);
    EstimateResult r;
    r.beta = pilot_beta + step;
    r.iterations = 1;
    r.converged = true;
    r.final_step_norm = step.lpNorm<Eigen::Infinity>();
    r.kind = EstimatorKind::OneStep;
    return r;
}

// Average of per-worker local MLEs.
inline EstimateResult one_shot_estimate(const std::vector<EstimateResult>& local_fits,
                                        OneShotWeights weights = OneShotWeights::Equal,
                                        const std::vector<std::uint64_t>& sizes = {}) {
    if (local_fits.empty()) throw ConfigError("one_shot_estimate: no local fits");
    std::vector<int> failed;
    for (std::size_t k = 0; k < local_fits.size(); ++k)
        if (!local_fits[k].converged) failed.push_back(static_cast<int>(k));
    if (!failed.empty()) {
        std::string msg = "one_shot_estimate: non-converged local fits on workers";
        for (int k : failed) msg += " " + std::to_string(k);
        throw OneShotUnavailableError(msg, failed);
    }
    const Eigen::Index d = local_fits.front().beta.size();
    VectorXd avg = VectorXd::Zero(d);
    if (weights == OneShotWeights::BySize) {
        if (sizes.size() != local_fits.size())
            throw ShapeError("one_shot_estimate: sizes length != K");
        double total = 0.0;
        for (std::size_t k = 0; k < local_fits.size(); ++k) {
            if (local_fits[k].beta.size() != d)
                throw ShapeError("one_shot_estimate: inconsistent d");
            avg += static_cast<double>(sizes[k]) * local_fits[k].beta;
            total += static_cast<double>(sizes[k]);
        }
        avg /= total;
    } else {
        for (const auto& fit : local_fits) {
            if (fit.beta.size() != d) throw ShapeError("one_shot_estimate: inconsistent d");
            avg += fit.beta;
        }
        avg /= static_cast<double>(local_fits.size());
    }
    EstimateResult r;
    r.beta = std::move(avg);
    r.converged = true;
    r.kind = EstimatorKind::OneShot;
    return r;
}

// Communication-efficient surrogate likelihood: maximize
//   l1(beta)/N1 - (score1(anchor)/N1 - global_grad_per_row)^T beta
// by Newton on the anchor shard.
inline EstimateResult csl_estimate(Family family, const DataShard& anchor_shard,
                                   const VectorXd& anchor_beta,
                                   const VectorXd& global_grad_per_row,
                                   double tol = kDefaultTol, int max_iter = kDefaultMaxIter) {
    anchor_shard.check();
    if (anchor_beta.size() != anchor_shard.dim() ||
        global_grad_per_row.size() != anchor_shard.dim())
        throw ShapeError("csl_estimate: dimension mismatch");
    const double n1 = static_cast<double>(anchor_shard.rows());
    const VectorXd correction =
        derivatives(family, anchor_shard, anchor_beta).score / n1 - global_grad_per_row;
    EstimateResult r = newton_solve(
        [&](const VectorXd& b) {
            DerivativeBundle bundle = derivatives(family, anchor_shard, b);
            bundle.score = bundle.score / n1 - correction;
            bundle.info /= n1;
            bundle.log_lik = bundle.log_lik / n1 - correction.dot(b);
            return bundle;
        },
        [&](const VectorXd& b) {
            return log_lik_kernel(family, anchor_shard, b) / n1 - correction.dot(b);
        },
        anchor_beta, tol, max_iter);
    r.kind = EstimatorKind::CSL;
    // Report the anchor-shard kernel, not the surrogate value.
    r.log_lik = log_lik_kernel(family, anchor_shard, r.beta);
    return r;
}

}  // namespace oglm

#endif  // OGLM_ESTIMATORS_HPP
