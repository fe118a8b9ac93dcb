// Command-line front end: simulation drivers, CSV estimation and testing,
// and the worker daemon.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oglm/csv.hpp"
#include "oglm/report.hpp"
#include "oglm/simulate.hpp"

namespace {

using nlohmann::json;
using namespace oglm;

constexpr int kExitConfig = 2;
constexpr int kExitExperiment = 3;
constexpr int kExitParse = 4;
constexpr int kExitSolver = 5;
constexpr int kExitNetwork = 6;

Family parse_family(const std::string& s) {
    if (s == "logistic") return Family::Logistic;
    if (s == "poisson") return Family::Poisson;
    throw ConfigError("unknown family '" + s + "' (expected logistic|poisson)");
}

CovariateLaw parse_law(const std::string& s) {
    if (s == "normal") return CovariateLaw::StdNormal;
    if (s == "uniform") return CovariateLaw::Uniform01;
    if (s == "intercept-uniform") return CovariateLaw::InterceptPlusUniform01;
    throw ConfigError("unknown covariate law '" + s + "'");
}

ShardStrategy parse_sharding(const std::string& s) {
    if (s == "random") return ShardStrategy::Random;
    if (s == "nonrandom") return ShardStrategy::CovariateSumOrdered;
    throw ConfigError("unknown sharding '" + s + "' (expected random|nonrandom)");
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(s);
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) out.push_back(cell);
    return out;
}

VectorXd parse_beta(const std::string& s) {
    const auto cells = split_commas(s);
    if (cells.empty()) throw ConfigError("--beta: empty");
    VectorXd beta(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        try {
            beta(static_cast<Eigen::Index>(i)) = std::stod(cells[i]);
        } catch (const std::exception&) {
            throw ConfigError("--beta: cannot parse '" + cells[i] + "'");
        }
    }
    return beta;
}

std::vector<EstimatorKind> parse_estimators(const std::string& s) {
    std::vector<EstimatorKind> out;
    for (const auto& name : split_commas(s)) {
        if (name == "global" || name == "go")
            out.push_back(EstimatorKind::Global);
        else if (name == "one-shot" || name == "os")
            out.push_back(EstimatorKind::OneShot);
        else if (name == "csl")
            out.push_back(EstimatorKind::CSL);
        else if (name == "pilot")
            out.push_back(EstimatorKind::Pilot);
        else if (name == "one-step")
            out.push_back(EstimatorKind::OneStep);
        else
            throw ConfigError("unknown estimator '" + name + "'");
    }
    if (out.empty()) throw ConfigError("--estimators: empty");
    return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string mode = "estimation";
    std::string preset;
    std::string cell;
    std::string family = "logistic";
    std::string beta;
    std::string law;
    std::string sharding = "random";
    std::string estimators;
    std::uint64_t N = 10000;
    int K = 5;
    double p = 0.1;
    int reps = 500;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    double beta_alt = 0.1;
    int fix_index = 1;
    double fix_value = 0.0;
    bool force_csl = false;
    int threads = 0;
    std::string out;
    std::string config_path;
};

void apply_preset(SimulateArgs& a) {
    if (a.preset.empty()) return;
    if (a.preset == "table1") {
        a.mode = "estimation";
        a.family = "logistic";
        if (a.beta.empty()) a.beta = "1,2,1";
        if (a.law.empty()) a.law = "normal";
    } else if (a.preset == "table2") {
        a.mode = "estimation";
        a.family = "poisson";
        if (a.beta.empty()) a.beta = "1,-1,-0.5";
        if (a.law.empty()) a.law = "uniform";
    } else if (a.preset == "table3") {
        a.mode = "lrt";
        a.family = "logistic";
        if (a.beta.empty()) a.beta = "0.2,0";
        if (a.law.empty()) a.law = "intercept-uniform";
    } else if (a.preset == "table4") {
        a.mode = "lrt";
        a.family = "poisson";
        if (a.beta.empty()) a.beta = "0.5,0";
        if (a.law.empty()) a.law = "intercept-uniform";
    } else {
        throw ConfigError("unknown preset '" + a.preset + "' (expected table1..table4)");
    }
}

void apply_cell(SimulateArgs& a) {
    if (a.cell.empty()) return;
    for (const auto& kv : split_commas(a.cell)) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--cell: expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        try {
            if (key == "N")
                a.N = std::stoull(val);
            else if (key == "K")
                a.K = std::stoi(val);
            else if (key == "p")
                a.p = std::stod(val);
            else if (key == "sharding")
                a.sharding = val;
            else
                throw ConfigError("--cell: unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("--cell: cannot parse value for '" + key + "'");
        }
    }
}

// RunConfig file: flat JSON mirroring the flags; unknown keys rejected.
void apply_config_file(SimulateArgs& a) {
    if (a.config_path.empty()) return;
    std::ifstream in(a.config_path);
    if (!in) throw ConfigError("config: cannot open " + a.config_path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "mode")
                a.mode = value.get<std::string>();
            else if (key == "preset")
                a.preset = value.get<std::string>();
            else if (key == "family")
                a.family = value.get<std::string>();
            else if (key == "beta")
                a.beta = value.get<std::string>();
            else if (key == "covariate_law")
                a.law = value.get<std::string>();
            else if (key == "sharding")
                a.sharding = value.get<std::string>();
            else if (key == "estimators")
                a.estimators = value.get<std::string>();
            else if (key == "N")
                a.N = value.get<std::uint64_t>();
            else if (key == "K")
                a.K = value.get<int>();
            else if (key == "p")
                a.p = value.get<double>();
            else if (key == "reps")
                a.reps = value.get<int>();
            else if (key == "seed")
                a.seed = value.get<std::uint64_t>();
            else if (key == "alpha")
                a.alpha = value.get<double>();
            else if (key == "beta_alt")
                a.beta_alt = value.get<double>();
            else if (key == "fix_index")
                a.fix_index = value.get<int>();
            else if (key == "fix_value")
                a.fix_value = value.get<double>();
            else if (key == "force_csl")
                a.force_csl = value.get<bool>();
            else if (key == "threads")
                a.threads = value.get<int>();
            else if (key == "out")
                a.out = value.get<std::string>();
            else
                throw ConfigError("config: unknown key '" + key + "'");
        } catch (const json::exception&) {
            throw ConfigError("config: wrong type for key '" + key + "'");
        }
    }
}

int cmd_simulate(SimulateArgs a) {
    apply_config_file(a);
    apply_preset(a);
    apply_cell(a);

    SimConfig cfg;
    cfg.family = parse_family(a.family);
    if (a.beta.empty())
        a.beta = cfg.family == Family::Logistic ? "1,2,1" : "1,-1,-0.5";
    cfg.beta_true = parse_beta(a.beta);
    if (a.law.empty()) a.law = cfg.family == Family::Logistic ? "normal" : "uniform";
    cfg.covariate_law = parse_law(a.law);
    cfg.sharding = parse_sharding(a.sharding);
    cfg.N = a.N;
    cfg.K = a.K;
    cfg.pilot_fraction = a.p;
    cfg.B = a.reps;
    cfg.base_seed = a.seed;
    cfg.alpha = a.alpha;
    cfg.force_csl = a.force_csl;
    if (!a.estimators.empty()) cfg.estimators = parse_estimators(a.estimators);
    cfg.validate();

    const int threads = a.threads > 0
                            ? a.threads
                            : std::max(1u, std::thread::hardware_concurrency());

    SimReport report;
    if (a.mode == "estimation") {
        report = run_estimation_experiment(cfg, threads);
        std::cout << "estimation " << family_name(cfg.family) << " "
                  << strategy_name(cfg.sharding) << " N=" << cfg.N << " K=" << cfg.K
                  << " p=" << cfg.pilot_fraction << " B=" << cfg.B << "\n";
        for (const auto& [name, value] : report.armse)
            std::cout << "  armse " << name << " " << value << "\n";
    } else if (a.mode == "lrt") {
        Hypothesis hyp;
        hyp.restricted = {{a.fix_index, a.fix_value}};
        VectorXd alt(1);
        alt(0) = a.beta_alt;
        report = run_lrt_experiment(cfg, hyp, alt, threads);
        std::cout << "lrt " << family_name(cfg.family) << " " << strategy_name(cfg.sharding)
                  << " N=" << cfg.N << " K=" << cfg.K << " p=" << cfg.pilot_fraction
                  << " B=" << cfg.B << " beta_alt=" << a.beta_alt << "\n";
        for (const auto& [name, value] : report.size) {
            std::cout << "  size " << name << " " << value;
            if (report.power.count(name)) std::cout << "  power " << report.power.at(name);
            std::cout << "\n";
        }
    } else {
        throw ConfigError("--mode must be estimation or lrt");
    }
    for (const auto& [name, fails] : report.failures)
        std::cout << "  failures " << name << " " << fails << "\n";

    if (!a.out.empty()) {
        std::filesystem::create_directories(a.out);
        const auto dir = std::filesystem::path(a.out);
        if (a.mode == "estimation")
            write_estimation_csv((dir / "report.csv").string(), cfg, report);
        else
            write_lrt_csv((dir / "report.csv").string(), cfg, report);
        write_report_json((dir / "report.json").string(), cfg, report);
        std::cout << "wrote " << (dir / "report.csv").string() << " and "
                  << (dir / "report.json").string() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// shared data loading for estimate / test / worker

struct DataArgs {
    std::string data;
    std::string family = "logistic";
    std::string response = "y";
    std::string covariates;  // comma list; empty = every non-response column
    bool add_intercept = false;
    std::uint64_t synthetic_airline = 0;
    std::uint64_t synthetic_seed = 20080101;
    std::string write_data;
};

// Schema-compatible surrogate for the airline study: rows ordered by
// departure time so the file is sorted by a covariate. Clearly synthetic.
DataShard gen_synthetic_airline(std::uint64_t N, std::uint64_t seed) {
    SplitMix64 rng(seed);
    DataShard data;
    data.y.resize(static_cast<Eigen::Index>(N));
    data.X.resize(static_cast<Eigen::Index>(N), 4);
    for (std::uint64_t i = 0; i < N; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        const double t = static_cast<double>(i) / static_cast<double>(N);
        const double dep_time = 24.0 * t;  // sorted column
        const double distance = 0.2 + 2.8 * rng.uniform();
        const double air_time = 0.12 * distance * 60.0 * (0.9 + 0.2 * rng.uniform());
        const double elapsed = air_time + 20.0 + 25.0 * rng.uniform();
        data.X(r, 0) = dep_time;
        data.X(r, 1) = distance;
        data.X(r, 2) = elapsed / 60.0;
        data.X(r, 3) = air_time / 60.0;
        const double eta = -2.2 + 0.13 * dep_time + 0.25 * distance - 0.4 * (elapsed / 60.0) +
                           0.5 * (air_time / 60.0);
        data.y(r) = rng.uniform() < mean(Family::Logistic, eta) ? 1.0 : 0.0;
        data.row_ids.push_back(i);
    }
    return data;
}

const std::vector<std::string> kAirlineCovariates = {"DepTime", "Distance",
                                                     "ActualElapsedTime", "AirTime"};

struct LoadedData {
    DataShard data;
    std::vector<std::string> names;  // design matrix column names
};

LoadedData load_data(DataArgs& a, Family family) {
    LoadedData out;
    if (a.synthetic_airline > 0) {
        std::cout << "synthetic airline surrogate: " << a.synthetic_airline
                  << " rows (not real data)\n";
        out.data = gen_synthetic_airline(a.synthetic_airline, a.synthetic_seed);
        out.names = kAirlineCovariates;
        a.response = "Delayed";
        if (!a.write_data.empty())
            write_csv_dataset(a.write_data, out.data, a.response, out.names);
        if (a.add_intercept) {
            MatrixXd X(out.data.X.rows(), out.data.X.cols() + 1);
            X.col(0).setOnes();
            X.rightCols(out.data.X.cols()) = out.data.X;
            out.data.X = std::move(X);
            out.names.insert(out.names.begin(), "intercept");
        }
        return out;
    }
    if (a.data.empty()) throw ConfigError("--data is required (or --synthetic-airline)");
    const CsvTable table = read_csv(a.data);
    std::vector<std::string> covs = split_commas(a.covariates);
    if (covs.empty())
        for (const auto& name : table.header)
            if (name != a.response) covs.push_back(name);
    out.data = dataset_from_csv(table, a.response, covs, a.add_intercept, family);
    out.names = covs;
    if (a.add_intercept) out.names.insert(out.names.begin(), "intercept");
    if (!a.write_data.empty()) write_csv_dataset(a.write_data, out.data, a.response, out.names);
    return out;
}

struct TransportArgs {
    std::string workers;  // host:port,host:port -> TCP mode
    int shards = 1;
    bool nonrandom = false;
    std::uint64_t shard_seed = 1;
};

std::pair<std::string, int> parse_hostport(const std::string& s) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) throw ConfigError("expected host:port, got '" + s + "'");
    try {
        return {s.substr(0, colon), std::stoi(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError("bad port in '" + s + "'");
    }
}

SessionList open_sessions(const TransportArgs& t, const LoadedData& loaded, Family family) {
    SessionList sessions;
    if (!t.workers.empty()) {
        for (const auto& addr : split_commas(t.workers)) {
            const auto [host, port] = parse_hostport(addr);
            sessions.push_back(std::make_unique<TcpSession>(host, port));
        }
        return sessions;
    }
    const std::uint64_t N = static_cast<std::uint64_t>(loaded.data.rows());
    const PartitionPlan plan = t.nonrandom ? shard_by_covariate_sum(loaded.data.X, t.shards)
                                           : shard_random(N, t.shards, t.shard_seed);
    for (const auto& shard : build_shards(loaded.data, plan))
        sessions.push_back(std::make_unique<InProcessSession>(shard, family));
    return sessions;
}

std::uint64_t total_rows(const SessionList& sessions) {
    std::uint64_t n = 0;
    for (const auto& info : shard_info_round(sessions)) n += info.count;
    return n;
}

// Fetch worker 0's whole shard through a census pilot draw; used by CSL so
// both transports share one code path.
DataShard fetch_anchor_shard(WorkerSession& worker) {
    const auto info = detail::expect<wire::ShardInfoResp>(worker.call(wire::ShardInfoReq{}), 0,
                                                          "shard-info");
    auto rows = detail::expect<wire::PilotRowsResp>(
        worker.call(wire::Request{
            wire::PilotDrawReq{static_cast<std::uint32_t>(info.count), 0}}),
        0, "census-draw");
    DataShard shard;
    shard.y = std::move(rows.y);
    shard.X = std::move(rows.X);
    return shard;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
    DataArgs data;
    TransportArgs transport;
    std::string method = "one-step";
    double pilot_fraction = 0.1;
    std::uint64_t seed = 1;
    double tol = kDefaultTol;
    int max_iter = kDefaultMaxIter;
    bool weight_by_size = false;
    std::string out;
};

int cmd_estimate(EstimateArgs a) {
    const Family family = parse_family(a.data.family);
    LoadedData loaded;
    if (a.transport.workers.empty()) loaded = load_data(a.data, family);
    Transcript tr;
    SessionList sessions = open_sessions(a.transport, loaded, family);
    const std::uint64_t N = total_rows(sessions);
    const Eigen::Index d = shard_info_round(sessions)[0].d;

    EstimateResult result;
    if (a.method == "global") {
        result = global_estimate(sessions, VectorXd(), a.tol, a.max_iter, &tr);
    } else if (a.method == "one-step" || a.method == "pilot") {
        const std::uint64_t n = static_cast<std::uint64_t>(
            std::ceil(a.pilot_fraction * static_cast<double>(N)));
        auto outcome =
            run_one_step_protocol(sessions, family, n, a.seed, a.tol, a.max_iter, &tr);
        result = a.method == "pilot" ? outcome.pilot : outcome.one_step;
    } else if (a.method == "one-shot") {
        std::vector<EstimateResult> local;
        std::vector<std::uint64_t> sizes;
        const auto infos = shard_info_round(sessions, &tr);
        for (std::size_t k = 0; k < sessions.size(); ++k) {
            auto resp = detail::expect<wire::LocalFitResp>(
                sessions[k]->call(wire::Request{wire::LocalFitReq{
                    VectorXd::Zero(d), a.tol, static_cast<std::uint32_t>(a.max_iter)}}),
                static_cast<int>(k), "local-fit");
            local.push_back(resp.result);
            sizes.push_back(infos[k].count);
        }
        tr.rounds.push_back(detail::record_round("local-fit", sessions, true));
        result = one_shot_estimate(
            local, a.weight_by_size ? OneShotWeights::BySize : OneShotWeights::Equal, sizes);
        result.rounds = tr.aggregate_rounds();
    } else if (a.method == "csl") {
        auto anchor_fit = detail::expect<wire::LocalFitResp>(
            sessions[0]->call(wire::Request{wire::LocalFitReq{
                VectorXd::Zero(d), a.tol, static_cast<std::uint32_t>(a.max_iter)}}),
            0, "local-fit");
        if (!anchor_fit.result.converged)
            throw SingularInformationError("csl: anchor fit did not converge");
        const DerivativeBundle agg = master_aggregate(sessions, anchor_fit.result.beta, &tr);
        const DataShard anchor = fetch_anchor_shard(*sessions[0]);
        result = csl_estimate(family, anchor, anchor_fit.result.beta,
                              agg.score / static_cast<double>(agg.count), a.tol, a.max_iter);
        result.rounds = tr.aggregate_rounds();
    } else {
        throw ConfigError("unknown method '" + a.method + "'");
    }

    const double loglik = broadcast_loglik(sessions, result.beta, &tr);
    std::uint64_t bytes_up = 0, bytes_down = 0;
    for (const auto& s : sessions) {
        bytes_up += s->total_sent();
        bytes_down += s->total_received();
    }

    // Standard errors from the aggregate information at the estimate.
    const DerivativeBundle at_hat = master_aggregate(sessions, result.beta);
    const MatrixXd cov = at_hat.info.llt().solve(MatrixXd::Identity(d, d));

    json out;
    out["method"] = a.method;
    out["family"] = family_name(family);
    out["N"] = N;
    out["workers"] = sessions.size();
    out["beta"] = std::vector<double>(result.beta.data(), result.beta.data() + result.beta.size());
    std::vector<double> se;
    for (Eigen::Index j = 0; j < d; ++j) se.push_back(std::sqrt(cov(j, j)));
    out["stderr"] = se;
    out["log_lik"] = loglik;
    out["converged"] = result.converged;
    out["iterations"] = result.iterations;
    out["rounds"] = tr.aggregate_rounds();
    out["bytes_sent"] = bytes_up;
    out["bytes_received"] = bytes_down;
    if (!loaded.names.empty()) out["covariates"] = loaded.names;

    std::cout << out.dump(2) << "\n";
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f) throw std::runtime_error("cannot write " + a.out);
        f << out.dump(2) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// test

struct TestArgs {
    EstimateArgs est;
    std::vector<std::string> fixes;  // name=value or #index=value
};

Hypothesis parse_fixes(const std::vector<std::string>& fixes,
                       const std::vector<std::string>& names, Eigen::Index d) {
    if (fixes.empty()) throw ConfigError("--fix name=value is required");
    Hypothesis hyp;
    for (const auto& spec : fixes) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--fix: expected name=value, got '" + spec + "'");
        const std::string name = spec.substr(0, eq);
        double value = 0.0;
        try {
            value = std::stod(spec.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("--fix: cannot parse value in '" + spec + "'");
        }
        int idx = -1;
        if (!name.empty() && name[0] == '#') {
            try {
                idx = std::stoi(name.substr(1));
            } catch (const std::exception&) {
                throw ConfigError("--fix: bad index '" + name + "'");
            }
        } else {
            for (std::size_t j = 0; j < names.size(); ++j)
                if (names[j] == name) idx = static_cast<int>(j);
            if (idx < 0) throw ConfigError("--fix: unknown column '" + name + "'");
        }
        if (idx < 0 || idx >= static_cast<int>(d))
            throw ConfigError("--fix: index out of range in '" + spec + "'");
        hyp.restricted.emplace_back(idx, value);
    }
    hyp.validate(d);
    return hyp;
}

int cmd_test(TestArgs a) {
    const Family family = parse_family(a.est.data.family);
    LoadedData loaded;
    if (a.est.transport.workers.empty()) loaded = load_data(a.est.data, family);
    SessionList sessions = open_sessions(a.est.transport, loaded, family);
    const auto infos = shard_info_round(sessions);
    const Eigen::Index d = infos[0].d;
    std::uint64_t N = 0;
    for (const auto& info : infos) N += info.count;
    const Hypothesis hyp = parse_fixes(a.fixes, loaded.names, d);

    TestResult t;
    if (a.est.method == "global") {
        const EstimateResult alt =
            global_estimate(sessions, VectorXd(), a.est.tol, a.est.max_iter);
        const EstimateResult null_fit = master_fit_restricted(sessions, d, hyp, VectorXd(),
                                                              a.est.tol, a.est.max_iter);
        t = make_lrt(null_fit.log_lik, alt.log_lik, hyp.s(), TestMethod::GlobalLRT);
    } else if (a.est.method == "one-step") {
        const std::uint64_t n = static_cast<std::uint64_t>(
            std::ceil(a.est.pilot_fraction * static_cast<double>(N)));
        t = lrt_subvector_onestep(sessions, family, hyp, n, a.est.seed, a.est.tol,
                                  a.est.max_iter)
                .test;
    } else if (a.est.method == "pilot") {
        std::vector<std::uint64_t> sizes;
        for (const auto& info : infos) sizes.push_back(info.count);
        const std::uint64_t n = static_cast<std::uint64_t>(
            std::ceil(a.est.pilot_fraction * static_cast<double>(N)));
        const auto alloc = allocate_pilot(sizes, n);
        DataShard pilot_rows;
        pilot_rows.y.resize(static_cast<Eigen::Index>(n));
        pilot_rows.X.resize(static_cast<Eigen::Index>(n), d);
        Eigen::Index pos = 0;
        for (std::size_t k = 0; k < sessions.size(); ++k) {
            auto resp = detail::expect<wire::PilotRowsResp>(
                sessions[k]->call(wire::Request{wire::PilotDrawReq{
                    static_cast<std::uint32_t>(alloc[k]), derive_seed(a.est.seed, k)}}),
                static_cast<int>(k), "pilot-draw");
            pilot_rows.y.segment(pos, resp.y.size()) = resp.y;
            pilot_rows.X.middleRows(pos, resp.X.rows()) = resp.X;
            pos += resp.X.rows();
        }
        const EstimateResult alt =
            fit_mle(family, pilot_rows, VectorXd(), a.est.tol, a.est.max_iter);
        const EstimateResult null_fit = fit_mle_restricted(family, pilot_rows, hyp, VectorXd(),
                                                           a.est.tol, a.est.max_iter);
        t = make_lrt(null_fit.log_lik, alt.log_lik, hyp.s(), TestMethod::PilotLRT);
    } else if (a.est.method == "one-shot") {
        t = lrt_oneshot(sessions, hyp, a.est.tol, a.est.max_iter);
    } else {
        throw ConfigError("unknown method '" + a.est.method + "'");
    }

    json out;
    out["method"] = test_method_name(t.method);
    out["statistic"] = t.statistic;
    out["df"] = t.df;
    out["p_value"] = t.p_value;
    out["clamped"] = t.clamped;
    std::cout << out.dump(2) << "\n";
    if (!a.est.out.empty()) {
        std::ofstream f(a.est.out);
        if (!f) throw std::runtime_error("cannot write " + a.est.out);
        f << out.dump(2) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// worker

std::atomic<bool> g_stop{false};
std::atomic<int> g_listener_fd{-1};

void handle_signal(int) {
    g_stop.store(true);
    const int fd = g_listener_fd.exchange(-1);
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

struct WorkerArgs {
    std::string listen;
    DataArgs data;
};

int cmd_worker(WorkerArgs a) {
    const Family family = parse_family(a.data.family);
    LoadedData loaded = load_data(a.data, family);
    const auto [host, port] = parse_hostport(a.listen);

    net::Socket listener = net::listen_on(host, port);
    std::cout << "worker listening on " << host << ":" << net::bound_port(listener) << " ("
              << loaded.data.rows() << " rows, d=" << loaded.data.dim() << ", "
              << family_name(family) << ")" << std::endl;
    g_listener_fd.store(listener.fd());
    std::signal(SIGTERM, handle_signal);
    std::signal(SIGINT, handle_signal);

    const Worker worker(std::move(loaded.data), family);
    worker.serve(listener, g_stop, [](std::uint8_t msg_type) {
        const char* name = "unknown";
        switch (msg_type) {
            case wire::ReqPilotDraw: name = "pilot-draw"; break;
            case wire::ReqDerivatives: name = "derivatives"; break;
            case wire::ReqLogLik: name = "log-lik"; break;
            case wire::ReqLocalFit: name = "local-fit"; break;
            case wire::ReqShardInfo: name = "shard-info"; break;
        }
        std::cout << "request " << name << std::endl;
    });
    std::cout << "worker shutting down" << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed one-step GLM estimation"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run a Monte-Carlo experiment");
    simulate->add_option("--mode", sim.mode, "estimation|lrt");
    simulate->add_option("--preset", sim.preset, "table1|table2|table3|table4");
    simulate->add_option("--cell", sim.cell, "N=..,K=..,p=..,sharding=..");
    simulate->add_option("--family", sim.family, "logistic|poisson");
    simulate->add_option("--beta", sim.beta, "true coefficients, comma separated");
    simulate->add_option("--law", sim.law, "normal|uniform|intercept-uniform");
    simulate->add_option("--sharding", sim.sharding, "random|nonrandom");
    simulate->add_option("--estimators", sim.estimators, "subset of go,os,csl,pilot,one-step");
    simulate->add_option("--N", sim.N, "sample size");
    simulate->add_option("--K", sim.K, "number of workers");
    simulate->add_option("--p", sim.p, "pilot fraction");
    simulate->add_option("--reps", sim.reps, "replications");
    simulate->add_option("--seed", sim.seed, "base seed");
    simulate->add_option("--alpha", sim.alpha, "test level");
    simulate->add_option("--beta-alt", sim.beta_alt, "alternative value for the tested coefficient");
    simulate->add_option("--fix-index", sim.fix_index, "coordinate tested by the LRT");
    simulate->add_option("--fix-value", sim.fix_value, "null value of the tested coordinate");
    simulate->add_flag("--force-csl", sim.force_csl, "run CSL even under nonrandom sharding");
    simulate->add_option("--threads", sim.threads, "replication threads (default: cores)");
    simulate->add_option("--out", sim.out, "output directory for report.csv/report.json");
    simulate->add_option("--config", sim.config_path, "JSON run configuration");

    auto add_data_flags = [](CLI::App* cmd, DataArgs& d) {
        cmd->add_option("--data", d.data, "input CSV (header row required)");
        cmd->add_option("--family", d.family, "logistic|poisson");
        cmd->add_option("--response", d.response, "response column name");
        cmd->add_option("--covariates", d.covariates, "covariate columns, comma separated");
        cmd->add_flag("--add-intercept", d.add_intercept, "prepend a constant column");
        cmd->add_option("--synthetic-airline", d.synthetic_airline,
                        "generate a synthetic airline-shaped dataset with this many rows");
        cmd->add_option("--synthetic-seed", d.synthetic_seed, "seed for the synthetic dataset");
        cmd->add_option("--write-data", d.write_data, "also write the loaded dataset as CSV");
    };
    auto add_transport_flags = [](CLI::App* cmd, TransportArgs& t) {
        cmd->add_option("--workers", t.workers, "TCP workers host:port, comma separated");
        cmd->add_option("--shards", t.shards, "in-process worker count");
        cmd->add_flag("--nonrandom", t.nonrandom, "shard by covariate sum instead of randomly");
        cmd->add_option("--shard-seed", t.shard_seed, "seed for random sharding");
    };

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "fit one dataset");
    add_data_flags(estimate, est.data);
    add_transport_flags(estimate, est.transport);
    estimate->add_option("--method", est.method, "global|one-shot|one-step|csl|pilot");
    estimate->add_option("--pilot-fraction", est.pilot_fraction, "pilot fraction for one-step");
    estimate->add_option("--seed", est.seed, "pilot draw seed");
    estimate->add_option("--tol", est.tol, "Newton tolerance");
    estimate->add_option("--max-iter", est.max_iter, "Newton iteration cap");
    estimate->add_flag("--weight-by-size", est.weight_by_size, "size-weighted one-shot average");
    estimate->add_option("--out", est.out, "write the estimate as JSON");

    TestArgs test;
    auto* testcmd = app.add_subcommand("test", "likelihood ratio test");
    add_data_flags(testcmd, test.est.data);
    add_transport_flags(testcmd, test.est.transport);
    testcmd->add_option("--method", test.est.method, "global|one-step|pilot|one-shot");
    testcmd->add_option("--pilot-fraction", test.est.pilot_fraction, "pilot fraction");
    testcmd->add_option("--seed", test.est.seed, "pilot draw seed");
    testcmd->add_option("--tol", test.est.tol, "Newton tolerance");
    testcmd->add_option("--max-iter", test.est.max_iter, "Newton iteration cap");
    testcmd->add_option("--fix", test.fixes, "restriction name=value (repeatable; #i uses index)");
    testcmd->add_option("--out", test.est.out, "write the test result as JSON");

    WorkerArgs wrk;
    auto* workercmd = app.add_subcommand("worker", "serve one shard over TCP");
    workercmd->add_option("--listen", wrk.listen, "host:port")->required();
    add_data_flags(workercmd, wrk.data);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (estimate->parsed()) return cmd_estimate(est);
        if (testcmd->parsed()) return cmd_test(test);
        if (workercmd->parsed()) return cmd_worker(wrk);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CsvParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const NotPositiveDefiniteError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const SingularInformationError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const net::NetworkError& e) {
        std::cerr << "network error: " << e.what() << "\n";
        return kExitNetwork;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitExperiment;
    }
    return 0;
}
