#ifndef OGLM_MASTER_HPP
#define OGLM_MASTER_HPP

#include <string>
#include <utility>
#include <vector>

#include "oglm/estimators.hpp"
#include "oglm/glm.hpp"
#include "oglm/session.hpp"
#include "oglm/sharding.hpp"

namespace oglm {

// Per-round communication record: what was broadcast and how many bytes
// moved in each direction, per worker.
struct RoundRecord {
    std::string label;
    std::vector<std::uint64_t> bytes_up;    // master -> worker
    std::vector<std::uint64_t> bytes_down;  // worker -> master
    bool heavy = true;  // broadcast/aggregate round (vs metadata)
};

struct Transcript {
    std::vector<RoundRecord> rounds;

    int aggregate_rounds() const {
        int n = 0;
        for (const auto& r : rounds) n += r.heavy ? 1 : 0;
        return n;
    }
};

namespace detail {

template <class Resp>
Resp expect(wire::Response resp, int worker, const std::string& what) {
    if (auto* err = std::get_if<wire::ErrorResp>(&resp))
        throw AggregationError("worker " + std::to_string(worker) + " failed during " + what +
                                   ": " + err->message,
                               worker);
    if (auto* ok = std::get_if<Resp>(&resp)) return std::move(*ok);
    throw AggregationError("worker " + std::to_string(worker) + " returned wrong response to " +
                               what,
                           worker);
}

inline RoundRecord record_round(const std::string& label, const SessionList& workers,
                                bool heavy) {
    RoundRecord rec;
    rec.label = label;
    rec.heavy = heavy;
    for (const auto& w : workers) {
        rec.bytes_up.push_back(w->last_sent());
        rec.bytes_down.push_back(w->last_received());
    }
    return rec;
}

}  // namespace detail

// One metadata round: (N_k, d) per worker.
inline std::vector<wire::ShardInfoResp> shard_info_round(const SessionList& workers,
                                                         Transcript* transcript = nullptr) {
    std::vector<wire::ShardInfoResp> infos;
    for (std::size_t k = 0; k < workers.size(); ++k)
        infos.push_back(detail::expect<wire::ShardInfoResp>(
            workers[k]->call(wire::ShardInfoReq{}), static_cast<int>(k), "shard-info"));
    for (std::size_t k = 1; k < infos.size(); ++k)
        if (infos[k].d != infos[0].d)
            throw AggregationError("worker " + std::to_string(k) + " disagrees on d",
                                   static_cast<int>(k));
    if (transcript)
        transcript->rounds.push_back(detail::record_round("shard-info", workers, false));
    return infos;
}

// Broadcast beta, aggregate the returned bundles in ascending worker index.
// Any worker failure aborts the round; no partial aggregate is returned.
inline DerivativeBundle master_aggregate(const SessionList& workers, const VectorXd& beta,
                                         Transcript* transcript = nullptr) {
    if (workers.empty()) throw ConfigError("master_aggregate: no workers");
    DerivativeBundle total = DerivativeBundle::zero(beta.size());
    for (std::size_t k = 0; k < workers.size(); ++k) {
        auto resp = detail::expect<wire::DerivativesResp>(
            workers[k]->call(wire::DerivativesReq{beta}), static_cast<int>(k), "derivatives");
        total += resp.bundle;
    }
    if (transcript)
        transcript->rounds.push_back(detail::record_round("derivatives", workers, true));
    return total;
}

// Broadcast beta, sum the kernel log-likelihood across workers.
inline double broadcast_loglik(const SessionList& workers, const VectorXd& beta,
                               Transcript* transcript = nullptr) {
    double total = 0.0;
    for (std::size_t k = 0; k < workers.size(); ++k)
        total += detail::expect<wire::LogLikResp>(workers[k]->call(wire::LogLikReq{beta}),
                                                  static_cast<int>(k), "log-lik")
                     .value;
    if (transcript) transcript->rounds.push_back(detail::record_round("log-lik", workers, true));
    return total;
}

// Multi-round distributed Fisher scoring: each iteration broadcasts beta and
// aggregates bundles; step-halving probes cost one log-lik round each.
// Numerically matches fit_mle on the pooled rows.
inline EstimateResult global_estimate(const SessionList& workers, VectorXd init,
                                      double tol = kDefaultTol, int max_iter = kDefaultMaxIter,
                                      Transcript* transcript = nullptr) {
    const auto infos = shard_info_round(workers, transcript);
    if (init.size() == 0) init = VectorXd::Zero(infos[0].d);
    EstimateResult r = newton_solve(
        [&](const VectorXd& b) { return master_aggregate(workers, b, transcript); },
        [&](const VectorXd& b) { return broadcast_loglik(workers, b, transcript); },
        std::move(init), tol, max_iter);
    r.kind = EstimatorKind::Global;
    if (transcript) r.rounds = transcript->aggregate_rounds();
    return r;
}

struct OneStepOutcome {
    EstimateResult pilot;
    EstimateResult one_step;
    std::vector<std::uint64_t> pilot_allocation;
};

// The two-round protocol. Round 1: draw the stratified pilot from each
// worker and fit the pooled pilot MLE on the master. Round 2: broadcast the
// pilot point, aggregate full-data derivatives, take one undamped Newton
// step. A separate metadata round fetches shard sizes first.
inline OneStepOutcome run_one_step_protocol(const SessionList& workers, Family family,
                                            std::uint64_t n, std::uint64_t seed,
                                            double tol = kDefaultTol,
                                            int max_iter = kDefaultMaxIter,
                                            Transcript* transcript = nullptr) {
    const auto infos = shard_info_round(workers, transcript);
    const Eigen::Index d = infos[0].d;
    std::vector<std::uint64_t> sizes;
    for (const auto& info : infos) sizes.push_back(info.count);

    const auto alloc = allocate_pilot(sizes, n);

    // Round 1: pilot rows, pooled in ascending worker index.
    std::vector<wire::PilotRowsResp> rows;
    std::uint64_t pooled = 0;
    for (std::size_t k = 0; k < workers.size(); ++k) {
        auto resp = detail::expect<wire::PilotRowsResp>(
            workers[k]->call(wire::Request{wire::PilotDrawReq{
                static_cast<std::uint32_t>(alloc[k]), derive_seed(seed, k)}}),
            static_cast<int>(k), "pilot-draw");
        pooled += static_cast<std::uint64_t>(resp.X.rows());
        rows.push_back(std::move(resp));
    }
    if (transcript)
        transcript->rounds.push_back(detail::record_round("pilot-draw", workers, true));

    DataShard pilot_rows;
    pilot_rows.y.resize(static_cast<Eigen::Index>(pooled));
    pilot_rows.X.resize(static_cast<Eigen::Index>(pooled), d);
    Eigen::Index pos = 0;
    for (const auto& part : rows) {
        pilot_rows.y.segment(pos, part.y.size()) = part.y;
        pilot_rows.X.middleRows(pos, part.X.rows()) = part.X;
        pos += part.X.rows();
    }

    OneStepOutcome out;
    out.pilot_allocation = alloc;
    out.pilot = pilot_estimate(family, pilot_rows, tol, max_iter);
    out.pilot.rounds = 1;

    // Round 2: full-data derivatives at the pilot point, one Newton step.
    const DerivativeBundle aggregate = master_aggregate(workers, out.pilot.beta, transcript);
    out.one_step = one_step_estimate(out.pilot.beta, aggregate);
    out.one_step.rounds = 2;
    return out;
}

// Fisher scoring against a single worker's shard, with coordinates pinned by
// `hyp`, driven from the master through Derivatives/LogLik requests only.
inline EstimateResult remote_fit_restricted(WorkerSession& worker, Eigen::Index d,
                                            const Hypothesis& hyp, VectorXd init_full,
                                            double tol = kDefaultTol,
                                            int max_iter = kDefaultMaxIter) {
    hyp.validate(d);
    if (init_full.size() == 0) init_full = VectorXd::Zero(d);
    auto derivs_full = [&](const VectorXd& b) {
        return detail::expect<wire::DerivativesResp>(worker.call(wire::DerivativesReq{b}), 0,
                                                     "derivatives")
            .bundle;
    };
    auto loglik_full = [&](const VectorXd& b) {
        return detail::expect<wire::LogLikResp>(worker.call(wire::LogLikReq{b}), 0, "log-lik")
            .value;
    };
    if (hyp.s() == static_cast<int>(d)) {
        EstimateResult r;
        r.beta = expand_free(hyp, d, VectorXd());
        r.log_lik = loglik_full(r.beta);
        r.converged = true;
        r.final_step_norm = 0.0;
        return r;
    }
    EstimateResult reduced = newton_solve(
        [&](const VectorXd& bf) {
            return reduce_bundle(hyp, derivs_full(expand_free(hyp, d, bf)));
        },
        [&](const VectorXd& bf) { return loglik_full(expand_free(hyp, d, bf)); },
        reduce_free(hyp, d, init_full), tol, max_iter);
    reduced.beta = expand_free(hyp, d, reduced.beta);
    return reduced;
}

}  // namespace oglm

#endif  // OGLM_MASTER_HPP
