#include <doctest.h>

#include <cstring>
#include <thread>

#include "oglm/master.hpp"
#include "oglm/session.hpp"
#include "oglm/simulate.hpp"
#include "oracles.hpp"

using namespace oglm;

namespace {

DataShard symmetric_logistic() {
    DataShard s;
    s.y.resize(4);
    s.X.resize(4, 1);
    s.y << 0, 1, 0, 1;
    s.X << -1, -1, 1, 1;
    s.row_ids = {0, 1, 2, 3};
    return s;
}

// One worker served over loopback TCP for the lifetime of the fixture.
struct TcpWorker {
    net::Socket listener;
    int port;
    std::atomic<bool> stop{false};
    std::thread thread;

    TcpWorker(DataShard shard, Family family)
        : listener(net::listen_on("127.0.0.1", 0)), port(net::bound_port(listener)) {
        thread = std::thread([this, shard = std::move(shard), family] {
            const Worker w(shard, family);
            w.serve(listener, stop);
        });
    }

    ~TcpWorker() {
        stop.store(true);
        ::shutdown(listener.fd(), SHUT_RDWR);
        thread.join();
    }
};

}  // namespace

TEST_CASE("worker delegates to glm-core") {
    const DataShard shard = oracles::random_shard(Family::Poisson, 30, 2, 7);
    const Worker worker(shard, Family::Poisson);
    const VectorXd beta = oracles::random_beta(2, 8);
    const auto resp = worker.handle(wire::DerivativesReq{beta});
    const auto& bundle = std::get<wire::DerivativesResp>(resp).bundle;
    const auto direct = derivatives(Family::Poisson, shard, beta);
    CHECK(bundle.score == direct.score);
    CHECK(bundle.info == direct.info);
    CHECK(bundle.log_lik == direct.log_lik);
    CHECK(bundle.count == direct.count);
}

TEST_CASE("census pilot draw returns the whole shard") {
    const DataShard shard = oracles::random_shard(Family::Logistic, 12, 2, 9);
    const Worker worker(shard, Family::Logistic);
    const auto resp = worker.handle(wire::PilotDrawReq{12, 99});
    const auto& rows = std::get<wire::PilotRowsResp>(resp);
    CHECK(rows.y == shard.y);
    CHECK(rows.X == shard.X);
    const auto err = worker.handle(wire::PilotDrawReq{13, 99});
    CHECK(std::get<wire::ErrorResp>(err).code == wire::ErrAllocation);
}

TEST_CASE("identical requests get byte-identical responses") {
    const DataShard shard = oracles::random_shard(Family::Logistic, 20, 3, 10);
    const Worker worker(shard, Family::Logistic);
    const VectorXd beta = oracles::random_beta(3, 11);
    const auto a = wire::encode(worker.handle(wire::DerivativesReq{beta}));
    const auto b = wire::encode(worker.handle(wire::DerivativesReq{beta}));
    CHECK(a == b);
}

TEST_CASE("master_aggregate examples") {
    {
        const DataShard shard = oracles::random_shard(Family::Logistic, 25, 2, 12);
        SessionList one;
        one.push_back(std::make_unique<InProcessSession>(shard, Family::Logistic));
        const VectorXd beta = oracles::random_beta(2, 13);
        const auto agg = master_aggregate(one, beta);
        const auto direct = derivatives(Family::Logistic, shard, beta);
        CHECK(agg.score == direct.score);
        CHECK(agg.info == direct.info);
    }
    {
        SessionList two;
        two.push_back(std::make_unique<InProcessSession>(symmetric_logistic(), Family::Logistic));
        two.push_back(std::make_unique<InProcessSession>(symmetric_logistic(), Family::Logistic));
        const auto agg = master_aggregate(two, VectorXd::Zero(1));
        CHECK(agg.score(0) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(agg.info(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(agg.count == 8);
    }
}

TEST_CASE("a failing worker is named; no partial aggregate") {
    SessionList mixed;
    mixed.push_back(std::make_unique<InProcessSession>(symmetric_logistic(), Family::Logistic));
    // Worker 1 holds a d=2 shard; a d=1 broadcast is a shape error there.
    mixed.push_back(std::make_unique<InProcessSession>(
        oracles::random_shard(Family::Logistic, 6, 2, 14), Family::Logistic));
    try {
        master_aggregate(mixed, VectorXd::Zero(1));
        FAIL("expected AggregationError");
    } catch (const AggregationError& e) {
        CHECK(e.worker == 1);
        CHECK(std::string(e.what()).find("worker 1") != std::string::npos);
    }
}

TEST_CASE("global_estimate matches the pooled fit") {
    const DataShard data = oracles::random_shard(Family::Logistic, 300, 3, 15);
    const auto plan = shard_random(300, 5, 16);
    const auto sessions = make_inprocess_sessions(build_shards(data, plan), Family::Logistic);
    Transcript tr;
    const auto distributed = global_estimate(sessions, VectorXd(), kDefaultTol, 100, &tr);
    const auto pooled = fit_mle(Family::Logistic, data);
    CHECK(distributed.converged);
    CHECK((distributed.beta - pooled.beta).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(tr.aggregate_rounds() >= 3);
    CHECK(distributed.rounds == tr.aggregate_rounds());
}

TEST_CASE("one-step protocol: degenerate K=1 census pilot equals the MLE") {
    const DataShard data = oracles::random_shard(Family::Poisson, 200, 2, 17);
    SessionList one;
    one.push_back(std::make_unique<InProcessSession>(data, Family::Poisson));
    const auto out = run_one_step_protocol(one, Family::Poisson, 200, 18);
    const auto pooled = fit_mle(Family::Poisson, data);
    CHECK((out.pilot.beta - pooled.beta).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((out.one_step.beta - pooled.beta).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(out.pilot.rounds == 1);
    CHECK(out.one_step.rounds == 2);
}

TEST_CASE("round and byte accounting of the one-step pipeline") {
    const Eigen::Index d = 3;
    const DataShard data = oracles::random_shard(Family::Logistic, 230, d, 19);
    // Deliberately unequal shards: payload must not depend on N_k.
    PartitionPlan plan;
    plan.K = 3;
    plan.strategy = ShardStrategy::Random;
    plan.assignments.assign(230, 0);
    for (int i = 40; i < 110; ++i) plan.assignments[static_cast<std::size_t>(i)] = 1;
    for (int i = 110; i < 230; ++i) plan.assignments[static_cast<std::size_t>(i)] = 2;
    const auto sessions = make_inprocess_sessions(build_shards(data, plan), Family::Logistic);
    Transcript tr;
    run_one_step_protocol(sessions, Family::Logistic, 46, 20, kDefaultTol, 100, &tr);

    REQUIRE(tr.rounds.size() == 3);
    CHECK(tr.rounds[0].label == "shard-info");
    CHECK_FALSE(tr.rounds[0].heavy);
    CHECK(tr.rounds[1].label == "pilot-draw");
    CHECK(tr.rounds[2].label == "derivatives");
    CHECK(tr.aggregate_rounds() == 2);

    const std::uint64_t bundle_bytes =
        wire::kHeaderSize + 8 * (static_cast<std::uint64_t>(d) + d * d + 1) + 8;
    for (std::size_t k = 0; k < sessions.size(); ++k) {
        CHECK(tr.rounds[2].bytes_down[k] == bundle_bytes);
        CHECK(tr.rounds[2].bytes_up[k] == wire::kHeaderSize + 8 * static_cast<std::uint64_t>(d));
    }
}

TEST_CASE("in-process and TCP transports are bitwise identical") {
    const Eigen::Index d = 3;
    const DataShard data = oracles::random_shard(Family::Logistic, 400, d, 21);
    const auto plan = shard_random(400, 3, 22);
    const auto shards = build_shards(data, plan);

    const auto in_proc = make_inprocess_sessions(shards, Family::Logistic);
    const auto local_one_step = run_one_step_protocol(in_proc, Family::Logistic, 80, 23);
    const auto local_global = global_estimate(in_proc, VectorXd());

    std::vector<std::unique_ptr<TcpWorker>> daemons;
    SessionList remote;
    for (const auto& shard : shards) {
        daemons.push_back(std::make_unique<TcpWorker>(shard, Family::Logistic));
        remote.push_back(std::make_unique<TcpSession>("127.0.0.1", daemons.back()->port));
    }
    const auto tcp_one_step = run_one_step_protocol(remote, Family::Logistic, 80, 23);
    const auto tcp_global = global_estimate(remote, VectorXd());

    auto bitwise_equal = [](const VectorXd& a, const VectorXd& b) {
        return a.size() == b.size() &&
               std::memcmp(a.data(), b.data(),
                           sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
    };
    CHECK(bitwise_equal(local_one_step.pilot.beta, tcp_one_step.pilot.beta));
    CHECK(bitwise_equal(local_one_step.one_step.beta, tcp_one_step.one_step.beta));
    CHECK(bitwise_equal(local_global.beta, tcp_global.beta));
    CHECK(local_global.log_lik == tcp_global.log_lik);
}

TEST_CASE("malformed payload gets an Error response and the daemon survives") {
    TcpWorker daemon(oracles::random_shard(Family::Logistic, 10, 2, 24), Family::Logistic);
    net::Socket sock = net::connect_to("127.0.0.1", daemon.port);
    sock.set_timeout(5.0);

    // Valid frame header, garbage local-fit payload (length not of form 12+8k).
    std::vector<std::uint8_t> bad(wire::kHeaderSize + 5, 0);
    std::memcpy(bad.data(), "OGLM", 4);
    bad[4] = wire::kVersion;
    bad[5] = wire::ReqLocalFit;
    bad[6] = 5;
    sock.write_all(bad.data(), bad.size());
    auto frame = net::read_frame(sock);
    auto view = wire::parse_frame(frame.data(), frame.size());
    REQUIRE(view.has_value());
    const auto resp = wire::decode_response(*view);
    CHECK(std::get<wire::ErrorResp>(resp).code == wire::ErrMalformed);

    // Same connection still answers real requests.
    const auto good = wire::encode(wire::Request{wire::ShardInfoReq{}});
    sock.write_all(good.data(), good.size());
    frame = net::read_frame(sock);
    view = wire::parse_frame(frame.data(), frame.size());
    REQUIRE(view.has_value());
    CHECK(std::get<wire::ShardInfoResp>(wire::decode_response(*view)).count == 10);

    // Bad magic closes the connection.
    std::vector<std::uint8_t> junk(wire::kHeaderSize, 'X');
    sock.write_all(junk.data(), junk.size());
    CHECK(net::read_frame(sock).empty());

    // ...but the daemon accepts a fresh connection afterwards.
    net::Socket again = net::connect_to("127.0.0.1", daemon.port);
    again.set_timeout(5.0);
    again.write_all(good.data(), good.size());
    CHECK_FALSE(net::read_frame(again).empty());
}

TEST_CASE("unreachable worker raises a network error") {
    CHECK_THROWS_AS(TcpSession("127.0.0.1", 1, 0.5), net::NetworkError);
}
