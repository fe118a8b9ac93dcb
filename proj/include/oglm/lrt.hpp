#ifndef OGLM_LRT_HPP
#define OGLM_LRT_HPP

#include <string>
#include <vector>

#include "oglm/chi2.hpp"
#include "oglm/hypothesis.hpp"
#include "oglm/master.hpp"

namespace oglm {

enum class TestMethod : std::uint8_t { GlobalLRT, OneStepLRT, PilotLRT, OneShotLRT };

inline std::string test_method_name(TestMethod m) {
    switch (m) {
        case TestMethod::GlobalLRT: return "GO";
        case TestMethod::OneStepLRT: return "One-Step";
        case TestMethod::PilotLRT: return "Pilot";
        case TestMethod::OneShotLRT: return "OS";
    }
    return "?";
}

struct TestResult {
    double statistic = 0.0;
    int df = 1;
    double p_value = 1.0;
    TestMethod method = TestMethod::GlobalLRT;
    // True when the raw 2*(l_alt - l_null) came out negative (possible for
    // approximate maximizers) and was clamped to zero.
    bool clamped = false;
};

// 2*(l(alt) - l(null)) against chi-square(df); both kernels must be over the
// same rows so dropped constants cancel.
inline TestResult make_lrt(double loglik_null, double loglik_alt, int df, TestMethod method) {
    TestResult t;
    t.method = method;
    t.df = df;
    const double raw = 2.0 * (loglik_alt - loglik_null);
    t.clamped = raw < 0.0;
    t.statistic = t.clamped ? 0.0 : raw;
    t.p_value = chi2_sf(t.statistic, df);
    return t;
}

inline TestResult lrt_full(const VectorXd& beta_null, const EstimateResult& beta_hat,
                           double loglik_at_null, double loglik_at_hat, TestMethod method) {
    if (beta_null.size() != beta_hat.beta.size())
        throw ShapeError("lrt_full: dimension mismatch");
    return make_lrt(loglik_at_null, loglik_at_hat, static_cast<int>(beta_null.size()), method);
}

struct OneStepLrtOutcome {
    TestResult test;
    EstimateResult unrestricted;  // one-step, with log_lik filled in
    EstimateResult restricted;    // restricted one-step, with log_lik filled in
};

// One-step LRT for H0: beta[restricted] = fixed values. One pilot sample
// feeds both fits. The restricted pilot fit and the restricted one-step
// update operate on the free coordinates: restricted rows/columns of the
// aggregate bundle at the restricted pilot point are deleted before the
// Newton step. One extra broadcast evaluates both kernels over the full
// data.
inline OneStepLrtOutcome lrt_subvector_onestep(const SessionList& workers, Family family,
                                               const Hypothesis& hyp, std::uint64_t n,
                                               std::uint64_t seed, double tol = kDefaultTol,
                                               int max_iter = kDefaultMaxIter,
                                               Transcript* transcript = nullptr) {
    const auto infos = shard_info_round(workers, transcript);
    const Eigen::Index d = infos[0].d;
    hyp.validate(d);
    std::vector<std::uint64_t> sizes;
    for (const auto& info : infos) sizes.push_back(info.count);
    const auto alloc = allocate_pilot(sizes, n);

    // Pilot rows (shared by the restricted and unrestricted fits).
    DataShard pilot_rows;
    {
        std::vector<wire::PilotRowsResp> parts;
        std::uint64_t pooled = 0;
        for (std::size_t k = 0; k < workers.size(); ++k) {
            auto resp = detail::expect<wire::PilotRowsResp>(
                workers[k]->call(wire::Request{wire::PilotDrawReq{
                    static_cast<std::uint32_t>(alloc[k]), derive_seed(seed, k)}}),
                static_cast<int>(k), "pilot-draw");
            pooled += static_cast<std::uint64_t>(resp.X.rows());
            parts.push_back(std::move(resp));
        }
        if (transcript)
            transcript->rounds.push_back(detail::record_round("pilot-draw", workers, true));
        pilot_rows.y.resize(static_cast<Eigen::Index>(pooled));
        pilot_rows.X.resize(static_cast<Eigen::Index>(pooled), d);
        Eigen::Index pos = 0;
        for (const auto& part : parts) {
            pilot_rows.y.segment(pos, part.y.size()) = part.y;
            pilot_rows.X.middleRows(pos, part.X.rows()) = part.X;
            pos += part.X.rows();
        }
    }

    OneStepLrtOutcome out;

    // Unrestricted: pilot fit, aggregate at the pilot point, one step.
    EstimateResult pilot = pilot_estimate(family, pilot_rows, tol, max_iter);
    const DerivativeBundle agg = master_aggregate(workers, pilot.beta, transcript);
    out.unrestricted = one_step_estimate(pilot.beta, agg);

    // Restricted: same pilot rows, free coordinates only.
    EstimateResult pilot_restricted =
        fit_mle_restricted(family, pilot_rows, hyp, VectorXd(), tol, max_iter);
    const DerivativeBundle agg_restricted =
        master_aggregate(workers, pilot_restricted.beta, transcript);
    if (hyp.s() == static_cast<int>(d)) {
        out.restricted = pilot_restricted;  // nothing free to update
        out.restricted.log_lik = agg_restricted.log_lik;
    } else {
        const DerivativeBundle reduced = reduce_bundle(hyp, agg_restricted);
        EstimateResult step = one_step_estimate(reduce_free(hyp, d, pilot_restricted.beta),
                                                reduced);
        out.restricted = step;
        out.restricted.beta = expand_free(hyp, d, step.beta);
    }

    // One extra broadcast: both kernels over the full data.
    out.unrestricted.log_lik = broadcast_loglik(workers, out.unrestricted.beta, transcript);
    if (hyp.s() != static_cast<int>(d))
        out.restricted.log_lik = broadcast_loglik(workers, out.restricted.beta, transcript);

    out.test = make_lrt(out.restricted.log_lik, out.unrestricted.log_lik, hyp.s(),
                        TestMethod::OneStepLRT);
    return out;
}

// One-shot LRT: every worker fits restricted and unrestricted local MLEs;
// the statistic sums the per-worker ratios and is chi-square(K*s). The
// unrestricted fit is a LocalFit request; the restricted fit is driven from
// the master through Derivatives requests, since the wire protocol carries
// no restriction.
inline TestResult lrt_oneshot(const SessionList& workers, const Hypothesis& hyp,
                              double tol = kDefaultTol, int max_iter = kDefaultMaxIter,
                              Transcript* transcript = nullptr) {
    const auto infos = shard_info_round(workers, transcript);
    const Eigen::Index d = infos[0].d;
    hyp.validate(d);
    double statistic = 0.0;
    std::vector<int> failed;
    for (std::size_t k = 0; k < workers.size(); ++k) {
        try {
            auto local = detail::expect<wire::LocalFitResp>(
                workers[k]->call(wire::Request{wire::LocalFitReq{
                    VectorXd::Zero(d), tol, static_cast<std::uint32_t>(max_iter)}}),
                static_cast<int>(k), "local-fit");
            if (!local.result.converged) {
                failed.push_back(static_cast<int>(k));
                continue;
            }
            VectorXd init = local.result.beta;
            EstimateResult restricted =
                remote_fit_restricted(*workers[k], d, hyp, init, tol, max_iter);
            statistic += 2.0 * (local.result.log_lik - restricted.log_lik);
        } catch (const AggregationError&) {
            failed.push_back(static_cast<int>(k));
        } catch (const SingularInformationError&) {
            failed.push_back(static_cast<int>(k));
        }
    }
    if (!failed.empty()) {
        std::string msg = "lrt_oneshot: local fits failed on workers";
        for (int k : failed) msg += " " + std::to_string(k);
        throw OneShotUnavailableError(msg, failed);
    }
    TestResult t;
    t.method = TestMethod::OneShotLRT;
    t.df = static_cast<int>(workers.size()) * hyp.s();
    t.clamped = statistic < 0.0;
    t.statistic = t.clamped ? 0.0 : statistic;
    t.p_value = chi2_sf(t.statistic, t.df);
    return t;
}

}  // namespace oglm

#endif  // OGLM_LRT_HPP
