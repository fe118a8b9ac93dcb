#ifndef OGLM_GLM_HPP
#define OGLM_GLM_HPP

#include <Eigen/Dense>
#include <utility>

#include "oglm/errors.hpp"
#include "oglm/family.hpp"
#include "oglm/hypothesis.hpp"
#include "oglm/linalg.hpp"
#include "oglm/types.hpp"

namespace oglm {

constexpr double kDefaultTol = 1e-8;
constexpr int kDefaultMaxIter = 100;
constexpr int kMaxHalvings = 30;

// Log-likelihood kernel sum_i { y_i eta_i - g(eta_i) } over a shard,
// summed in ascending row index.
inline double log_lik_kernel(Family family, const DataShard& shard, const VectorXd& beta) {
    shard.check();
    if (beta.size() != shard.dim()) throw ShapeError("log_lik_kernel: beta length != d");
    double ll = 0.0;
    for (Eigen::Index i = 0; i < shard.rows(); ++i)
        ll += log_lik_row(family, shard.y(i), shard.X.row(i).dot(beta));
    return ll;
}

// Score sum (y_i - mu_i) x_i, expected information sum V(mu_i) x_i x_i^T,
// and the kernel value, all at one beta. Summation is in ascending row index
// so repeated evaluations are bit-identical.
inline DerivativeBundle derivatives(Family family, const DataShard& shard, const VectorXd& beta) {
    shard.check();
    if (beta.size() != shard.dim()) throw ShapeError("derivatives: beta length != d");
    const Eigen::Index d = shard.dim();
    DerivativeBundle bundle = DerivativeBundle::zero(d);
    for (Eigen::Index i = 0; i < shard.rows(); ++i) {
        const auto x = shard.X.row(i);
        const double eta = x.dot(beta);
        const double mu = mean(family, eta);
        const double v = variance_fn(family, mu);
        bundle.score.noalias() += (shard.y(i) - mu) * x.transpose();
        bundle.info.noalias() += v * x.transpose() * x;
        bundle.log_lik += log_lik_row(family, shard.y(i), eta);
    }
    bundle.count = static_cast<std::uint64_t>(shard.rows());
    return bundle;
}

// Fisher scoring with step-halving: beta <- beta + t * info^{-1} score, t
// halved while the kernel decreases. Under canonical links this is Newton on
// the expected information. The same loop drives local, pooled, and
// distributed fits; callers supply the derivative and kernel evaluators.
template <class DerivFn, class LogLikFn>
EstimateResult newton_solve(DerivFn&& derivs, LogLikFn&& loglik, VectorXd init,
                            double tol = kDefaultTol, int max_iter = kDefaultMaxIter) {
    if (!(tol > 0.0)) throw ConfigError("newton_solve: tol must be positive");
    if (max_iter < 1) throw ConfigError("newton_solve: max_iter must be >= 1");
    EstimateResult r;
    r.beta = std::move(init);
    for (int iter = 1; iter <= max_iter; ++iter) {
        const DerivativeBundle bundle = derivs(r.beta);
        VectorXd step;
        try {
            step = chol_solve(bundle.info, bundle.score);
        } catch (const NotPositiveDefiniteError&) {
            throw SingularInformationError("information not positive definite", iter);
        }
        r.iterations = iter;
        const double step_norm = step.lpNorm<Eigen::Infinity>();
        if (step_norm < tol) {
            r.converged = true;
            r.final_step_norm = step_norm;
            r.log_lik = bundle.log_lik;
            return r;
        }
        double t = 1.0;
        VectorXd cand = r.beta + step;
        double cand_ll = loglik(cand);
        int halvings = 0;
        // The kernel is a sum of `count` O(1) terms, so changes below a few
        // ulps of that sum are round-off noise; halving on them would freeze
        // the iterate short of the optimum.
        const double slack =
            4.0 * std::numeric_limits<double>::epsilon() *
            (static_cast<double>(bundle.count) + std::abs(bundle.log_lik));
        while (cand_ll < bundle.log_lik - slack && halvings < kMaxHalvings) {
            t *= 0.5;
            ++halvings;
            cand = r.beta + t * step;
            cand_ll = loglik(cand);
        }
        r.beta = std::move(cand);
        r.log_lik = cand_ll;
        r.final_step_norm = t * step_norm;
        // A damped update below tol only happens after heavy halving, i.e.
        // at the round-off plateau of the kernel: converged.
        if (r.final_step_norm < tol) {
            r.converged = true;
            return r;
        }
    }
    r.converged = false;
    return r;
}

inline EstimateResult fit_mle(Family family, const DataShard& shard, VectorXd init,
                              double tol = kDefaultTol, int max_iter = kDefaultMaxIter) {
    shard.check();
    if (init.size() == 0) init = VectorXd::Zero(shard.dim());
    if (init.size() != shard.dim()) throw ShapeError("fit_mle: init length != d");
    return newton_solve(
        [&](const VectorXd& b) { return derivatives(family, shard, b); },
        [&](const VectorXd& b) { return log_lik_kernel(family, shard, b); }, std::move(init),
        tol, max_iter);
}

inline EstimateResult fit_mle(Family family, const DataShard& shard) {
    return fit_mle(family, shard, VectorXd());
}

// MLE with some coordinates pinned. Fisher scoring runs on the free
// coordinates; score/information are the free submatrices of the full
// bundle. Returns the full-length beta with pinned values in place.
inline EstimateResult fit_mle_restricted(Family family, const DataShard& shard,
                                         const Hypothesis& hyp, VectorXd init_full,
                                         double tol = kDefaultTol,
                                         int max_iter = kDefaultMaxIter) {
    shard.check();
    const Eigen::Index d = shard.dim();
    hyp.validate(d);
    if (init_full.size() == 0) init_full = VectorXd::Zero(d);
    if (hyp.s() == static_cast<int>(d)) {
        // Nothing free: the "fit" is the hypothesized point itself.
        EstimateResult r;
        r.beta = expand_free(hyp, d, VectorXd());
        r.log_lik = log_lik_kernel(family, shard, r.beta);
        r.converged = true;
        r.final_step_norm = 0.0;
        return r;
    }
    EstimateResult reduced = newton_solve(
        [&](const VectorXd& bf) {
            return reduce_bundle(hyp, derivatives(family, shard, expand_free(hyp, d, bf)));
        },
        [&](const VectorXd& bf) {
            return log_lik_kernel(family, shard, expand_free(hyp, d, bf));
        },
        reduce_free(hyp, d, init_full), tol, max_iter);
    reduced.beta = expand_free(hyp, d, reduced.beta);
    return reduced;
}

}  // namespace oglm

#endif  // OGLM_GLM_HPP
