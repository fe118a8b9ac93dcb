#ifndef OGLM_SIMULATE_HPP
#define OGLM_SIMULATE_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "oglm/generators.hpp"
#include "oglm/lrt.hpp"
#include "oglm/master.hpp"
#include "oglm/metrics.hpp"

namespace oglm {

struct SimConfig {
    Family family = Family::Logistic;
    VectorXd beta_true;
    std::uint64_t N = 10000;
    int K = 5;
    double pilot_fraction = 0.1;
    ShardStrategy sharding = ShardStrategy::Random;
    std::vector<EstimatorKind> estimators = {EstimatorKind::Global, EstimatorKind::OneShot,
                                             EstimatorKind::CSL, EstimatorKind::Pilot,
                                             EstimatorKind::OneStep};
    int B = 500;
    std::uint64_t base_seed = 1;
    CovariateLaw covariate_law = CovariateLaw::StdNormal;
    double tol = kDefaultTol;
    int max_iter = kDefaultMaxIter;
    bool force_csl = false;
    OneShotWeights one_shot_weights = OneShotWeights::Equal;
    double alpha = 0.05;

    std::uint64_t pilot_n() const {
        return static_cast<std::uint64_t>(
            std::ceil(pilot_fraction * static_cast<double>(N)));
    }

    void validate() const {
        if (beta_true.size() < 1) throw ConfigError("SimConfig: beta_true empty");
        if (!(pilot_fraction > 0.0 && pilot_fraction <= 1.0))
            throw ConfigError("SimConfig: pilot_fraction must be in (0,1]");
        if (pilot_n() < static_cast<std::uint64_t>(beta_true.size()))
            throw ConfigError("SimConfig: ceil(p*N) must be >= d");
        if (B < 1) throw ConfigError("SimConfig: B must be >= 1");
        if (K < 1 || static_cast<std::uint64_t>(K) > N)
            throw ConfigError("SimConfig: need 1 <= K <= N");
    }
};

struct EstimateRecord {
    int b = 0;
    EstimatorKind kind = EstimatorKind::Global;
    bool ok = false;
    std::string error;
    VectorXd beta;
};

struct TestRecord {
    int b = 0;
    TestMethod method = TestMethod::GlobalLRT;
    bool under_null = true;
    bool ok = false;
    std::string error;
    double statistic = 0.0;
    int df = 1;
    double p_value = 1.0;
    bool clamped = false;
    bool reject = false;
};

struct SimReport {
    std::map<std::string, double> armse;        // estimation mode
    std::map<std::string, double> size;         // testing mode, null pass
    std::map<std::string, double> power;        // testing mode, alternative pass
    std::map<std::string, int> failures;
    std::vector<EstimateRecord> raw_estimates;
    std::vector<TestRecord> raw_tests;
    std::uint64_t base_seed = 0;
    double wall_seconds = 0.0;
};

namespace detail {

inline DataShard slice_shard(const DataShard& data, const std::vector<std::uint64_t>& rows) {
    DataShard out;
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    out.X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
    out.row_ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(rows[i]);
        out.y(static_cast<Eigen::Index>(i)) = data.y(r);
        out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(r);
        out.row_ids.push_back(rows[i]);
    }
    return out;
}

// Replications are independent; run them on `threads` workers and keep
// results keyed by b so thread count never affects the report.
template <class Body>
void for_each_replication(int B, int threads, Body&& body) {
    threads = std::max(1, std::min(threads, B));
    if (threads == 1) {
        for (int b = 1; b <= B; ++b) body(b);
        return;
    }
    std::atomic<int> next{1};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int b = next.fetch_add(1); b <= B; b = next.fetch_add(1)) body(b);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

inline std::vector<DataShard> build_shards(const DataShard& data, const PartitionPlan& plan) {
    std::vector<DataShard> shards;
    shards.reserve(static_cast<std::size_t>(plan.K));
    for (int k = 0; k < plan.K; ++k)
        shards.push_back(detail::slice_shard(data, plan.worker_rows(k)));
    return shards;
}

inline SessionList make_inprocess_sessions(const std::vector<DataShard>& shards,
                                           Family family) {
    SessionList sessions;
    for (const auto& shard : shards)
        sessions.push_back(std::make_unique<InProcessSession>(shard, family));
    return sessions;
}

inline PartitionPlan make_plan(const SimConfig& cfg, const DataShard& data,
                               std::uint64_t shard_seed) {
    return cfg.sharding == ShardStrategy::Random
               ? shard_random(cfg.N, cfg.K, shard_seed)
               : shard_by_covariate_sum(data.X, cfg.K);
}

// Fisher scoring over the whole session list with pinned coordinates;
// the distributed counterpart of fit_mle_restricted.
inline EstimateResult master_fit_restricted(const SessionList& workers, Eigen::Index d,
                                            const Hypothesis& hyp, VectorXd init_full,
                                            double tol = kDefaultTol,
                                            int max_iter = kDefaultMaxIter,
                                            Transcript* transcript = nullptr) {
    hyp.validate(d);
    if (init_full.size() == 0) init_full = VectorXd::Zero(d);
    if (hyp.s() == static_cast<int>(d)) {
        EstimateResult r;
        r.beta = expand_free(hyp, d, VectorXd());
        r.log_lik = broadcast_loglik(workers, r.beta, transcript);
        r.converged = true;
        r.final_step_norm = 0.0;
        return r;
    }
    EstimateResult reduced = newton_solve(
        [&](const VectorXd& bf) {
            return reduce_bundle(hyp,
                                 master_aggregate(workers, expand_free(hyp, d, bf), transcript));
        },
        [&](const VectorXd& bf) {
            return broadcast_loglik(workers, expand_free(hyp, d, bf), transcript);
        },
        reduce_free(hyp, d, init_full), tol, max_iter);
    reduced.beta = expand_free(hyp, d, reduced.beta);
    return reduced;
}

// One replication of the estimation comparison on one sharded dataset.
inline std::vector<EstimateRecord> run_estimation_replication(const SimConfig& cfg, int b,
                                                              std::uint64_t seed_b) {
    const DataShard data =
        gen_data(cfg.family, cfg.N, cfg.beta_true, cfg.covariate_law, derive_seed(seed_b, 101));
    const PartitionPlan plan = make_plan(cfg, data, derive_seed(seed_b, 102));
    const auto shards = build_shards(data, plan);
    const auto sessions = make_inprocess_sessions(shards, cfg.family);
    const std::uint64_t pilot_seed = derive_seed(seed_b, 103);

    std::vector<EstimateRecord> records;
    auto push = [&](EstimatorKind kind, const std::function<VectorXd()>& run) {
        EstimateRecord rec;
        rec.b = b;
        rec.kind = kind;
        try {
            rec.beta = run();
            rec.ok = true;
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        records.push_back(std::move(rec));
    };

    // The one-step protocol yields the pilot estimate too; run it once.
    OneStepOutcome protocol_out;
    bool protocol_ok = false;
    std::string protocol_error;
    const bool want_pilot =
        std::count(cfg.estimators.begin(), cfg.estimators.end(), EstimatorKind::Pilot) > 0;
    const bool want_onestep =
        std::count(cfg.estimators.begin(), cfg.estimators.end(), EstimatorKind::OneStep) > 0;
    if (want_pilot || want_onestep) {
        try {
            protocol_out = run_one_step_protocol(sessions, cfg.family, cfg.pilot_n(),
                                                 pilot_seed, cfg.tol, cfg.max_iter);
            protocol_ok = true;
        } catch (const std::exception& e) {
            protocol_error = e.what();
        }
    }

    for (EstimatorKind kind : cfg.estimators) {
        switch (kind) {
            case EstimatorKind::Global:
                push(kind, [&] {
                    return global_estimate(sessions, VectorXd(), cfg.tol, cfg.max_iter).beta;
                });
                break;
            case EstimatorKind::Pilot:
            case EstimatorKind::OneStep: {
                EstimateRecord rec;
                rec.b = b;
                rec.kind = kind;
                if (protocol_ok) {
                    rec.ok = true;
                    rec.beta = kind == EstimatorKind::Pilot ? protocol_out.pilot.beta
                                                            : protocol_out.one_step.beta;
                } else {
                    rec.error = protocol_error;
                }
                records.push_back(std::move(rec));
                break;
            }
            case EstimatorKind::OneShot:
                push(kind, [&] {
                    std::vector<EstimateResult> local;
                    std::vector<std::uint64_t> sizes;
                    for (std::size_t k = 0; k < sessions.size(); ++k) {
                        auto resp = detail::expect<wire::LocalFitResp>(
                            sessions[k]->call(wire::Request{wire::LocalFitReq{
                                VectorXd::Zero(data.X.cols()), cfg.tol,
                                static_cast<std::uint32_t>(cfg.max_iter)}}),
                            static_cast<int>(k), "local-fit");
                        local.push_back(resp.result);
                        sizes.push_back(static_cast<std::uint64_t>(shards[k].rows()));
                    }
                    return one_shot_estimate(local, cfg.one_shot_weights, sizes).beta;
                });
                break;
            case EstimatorKind::CSL: {
                // The paper's comparison omits CSL under nonrandom sharding.
                if (cfg.sharding == ShardStrategy::CovariateSumOrdered && !cfg.force_csl)
                    break;
                push(kind, [&] {
                    auto anchor = detail::expect<wire::LocalFitResp>(
                        sessions[0]->call(wire::Request{wire::LocalFitReq{
                            VectorXd::Zero(data.X.cols()), cfg.tol,
                            static_cast<std::uint32_t>(cfg.max_iter)}}),
                        0, "local-fit");
                    if (!anchor.result.converged)
                        throw SingularInformationError("csl: anchor fit did not converge");
                    const DerivativeBundle agg =
                        master_aggregate(sessions, anchor.result.beta);
                    const VectorXd grad_per_row =
                        agg.score / static_cast<double>(agg.count);
                    return csl_estimate(cfg.family, shards[0], anchor.result.beta,
                                        grad_per_row, cfg.tol, cfg.max_iter)
                        .beta;
                });
                break;
            }
        }
    }
    return records;
}

inline SimReport run_estimation_experiment(const SimConfig& cfg, int threads = 1) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    SimReport report;
    report.base_seed = cfg.base_seed;
    std::vector<std::vector<EstimateRecord>> per_b(static_cast<std::size_t>(cfg.B));
    detail::for_each_replication(cfg.B, threads, [&](int b) {
        per_b[static_cast<std::size_t>(b - 1)] =
            run_estimation_replication(cfg, b, cfg.base_seed + b);
    });
    for (auto& records : per_b)
        for (auto& rec : records) report.raw_estimates.push_back(std::move(rec));
    // ARMSE per estimator over successful replications; a failure rate above
    // 5% invalidates the cell.
    std::map<std::string, std::vector<VectorXd>> ok;
    for (const auto& rec : report.raw_estimates) {
        const std::string name = estimator_name(rec.kind);
        if (rec.ok)
            ok[name].push_back(rec.beta);
        else
            ++report.failures[name];
    }
    for (const auto& [name, estimates] : ok) {
        const int fails = report.failures.count(name) ? report.failures[name] : 0;
        if (fails > cfg.B / 20)
            throw std::runtime_error("experiment: estimator " + name + " failed " +
                                     std::to_string(fails) + "/" + std::to_string(cfg.B) +
                                     " replications");
        report.armse[name] = armse(estimates, cfg.beta_true);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

// One replication of the LRT comparison on one generated dataset.
inline std::vector<TestRecord> run_lrt_replication(const SimConfig& cfg, const Hypothesis& hyp,
                                                   const VectorXd& gen_beta, bool under_null,
                                                   int b, std::uint64_t seed_b) {
    const Eigen::Index d = gen_beta.size();
    const std::uint64_t data_salt = under_null ? 101 : 104;
    const DataShard data =
        gen_data(cfg.family, cfg.N, gen_beta, cfg.covariate_law, derive_seed(seed_b, data_salt));
    const PartitionPlan plan = make_plan(cfg, data, derive_seed(seed_b, 102));
    const auto shards = build_shards(data, plan);
    const auto sessions = make_inprocess_sessions(shards, cfg.family);
    const std::uint64_t pilot_seed = derive_seed(seed_b, 103);

    std::vector<TestRecord> records;
    auto push = [&](TestMethod method, const std::function<TestResult()>& run) {
        TestRecord rec;
        rec.b = b;
        rec.method = method;
        rec.under_null = under_null;
        try {
            const TestResult t = run();
            rec.ok = true;
            rec.statistic = t.statistic;
            rec.df = t.df;
            rec.p_value = t.p_value;
            rec.clamped = t.clamped;
            rec.reject = t.p_value < cfg.alpha;
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        records.push_back(std::move(rec));
    };

    push(TestMethod::GlobalLRT, [&] {
        const EstimateResult alt =
            global_estimate(sessions, VectorXd(), cfg.tol, cfg.max_iter);
        const EstimateResult null_fit =
            master_fit_restricted(sessions, d, hyp, VectorXd(), cfg.tol, cfg.max_iter);
        return make_lrt(null_fit.log_lik, alt.log_lik, hyp.s(), TestMethod::GlobalLRT);
    });

    push(TestMethod::OneStepLRT, [&] {
        return lrt_subvector_onestep(sessions, cfg.family, hyp, cfg.pilot_n(), pilot_seed,
                                     cfg.tol, cfg.max_iter)
            .test;
    });

    push(TestMethod::PilotLRT, [&] {
        // LRT on the pilot sample itself: both fits and both kernels over
        // the n pilot rows.
        const PilotSample pilot = draw_pilot(plan, plan.shard_sizes(), cfg.pilot_n(), pilot_seed);
        std::vector<std::uint64_t> rows;
        for (const auto& ids : pilot.per_worker_ids)
            rows.insert(rows.end(), ids.begin(), ids.end());
        const DataShard pilot_rows = detail::slice_shard(data, rows);
        const EstimateResult alt = fit_mle(cfg.family, pilot_rows, VectorXd(), cfg.tol,
                                           cfg.max_iter);
        const EstimateResult null_fit =
            fit_mle_restricted(cfg.family, pilot_rows, hyp, VectorXd(), cfg.tol, cfg.max_iter);
        return make_lrt(null_fit.log_lik, alt.log_lik, hyp.s(), TestMethod::PilotLRT);
    });

    push(TestMethod::OneShotLRT,
         [&] { return lrt_oneshot(sessions, hyp, cfg.tol, cfg.max_iter); });

    return records;
}

// Two passes: data generated under H0 gives empirical size, data generated
// with the restricted coordinates at `beta_alt_values` gives empirical
// power.
inline SimReport run_lrt_experiment(const SimConfig& cfg, const Hypothesis& hyp,
                                    const VectorXd& beta_alt_values, int threads = 1) {
    cfg.validate();
    const Eigen::Index d = cfg.beta_true.size();
    hyp.validate(d);
    if (beta_alt_values.size() != hyp.s())
        throw ConfigError("run_lrt_experiment: beta_alt length != s");
    const auto t0 = std::chrono::steady_clock::now();

    VectorXd beta_null = cfg.beta_true;
    for (const auto& [i, v] : hyp.restricted) beta_null(i) = v;
    VectorXd beta_alt = cfg.beta_true;
    for (int j = 0; j < hyp.s(); ++j) beta_alt(hyp.restricted[j].first) = beta_alt_values(j);

    SimReport report;
    report.base_seed = cfg.base_seed;
    std::vector<std::vector<TestRecord>> per_b(static_cast<std::size_t>(cfg.B));
    detail::for_each_replication(cfg.B, threads, [&](int b) {
        auto& out = per_b[static_cast<std::size_t>(b - 1)];
        for (auto& rec : run_lrt_replication(cfg, hyp, beta_null, true, b, cfg.base_seed + b))
            out.push_back(std::move(rec));
        for (auto& rec : run_lrt_replication(cfg, hyp, beta_alt, false, b, cfg.base_seed + b))
            out.push_back(std::move(rec));
    });
    for (auto& records : per_b)
        for (auto& rec : records) report.raw_tests.push_back(std::move(rec));

    std::map<std::string, std::vector<bool>> null_ind, alt_ind;
    for (const auto& rec : report.raw_tests) {
        const std::string name = test_method_name(rec.method);
        if (!rec.ok) {
            ++report.failures[name];
            continue;
        }
        (rec.under_null ? null_ind : alt_ind)[name].push_back(rec.reject);
    }
    for (const auto& [name, fails] : report.failures)
        if (fails > (2 * cfg.B) / 20)
            throw std::runtime_error("experiment: test " + name + " failed " +
                                     std::to_string(fails) + " replications");
    for (const auto& [name, ind] : null_ind) report.size[name] = erp(ind);
    for (const auto& [name, ind] : alt_ind) report.power[name] = erp(ind);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace oglm

#endif  // OGLM_SIMULATE_HPP
