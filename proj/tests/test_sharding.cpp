#include <doctest.h>

#include <algorithm>
#include <set>

#include "oglm/sharding.hpp"

using namespace oglm;

TEST_CASE("shard_random balance and determinism") {
    {
        const auto plan = shard_random(4, 4, 11);
        for (std::uint64_t n : plan.shard_sizes()) CHECK(n == 1);
    }
    {
        const auto plan = shard_random(10, 3, 12);
        auto sizes = plan.shard_sizes();
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes == std::vector<std::uint64_t>{3, 3, 4});
    }
    {
        const auto plan = shard_random(50, 1, 13);
        CHECK(plan.shard_sizes() == std::vector<std::uint64_t>{50});
    }
    CHECK(shard_random(100, 7, 5).assignments == shard_random(100, 7, 5).assignments);
    CHECK(shard_random(100, 7, 5).assignments != shard_random(100, 7, 6).assignments);
    CHECK_THROWS_AS(shard_random(3, 4, 1), ConfigError);
}

TEST_CASE("shard_by_covariate_sum ordering") {
    {
        MatrixXd X(4, 1);
        X << 3, 1, 4, 2;
        const auto plan = shard_by_covariate_sum(X, 2);
        CHECK(plan.assignments == std::vector<int>{1, 0, 1, 0});
    }
    {
        // All Z equal: tie-break is original index order, contiguous blocks.
        const auto plan = shard_by_covariate_sum(MatrixXd::Ones(6, 2), 3);
        CHECK(plan.assignments == std::vector<int>{0, 0, 1, 1, 2, 2});
    }
    {
        const auto plan = shard_by_covariate_sum(MatrixXd::Random(9, 3), 1);
        for (int a : plan.assignments) CHECK(a == 0);
    }
}

TEST_CASE("shards partition the index set; Z means are nondecreasing") {
    MatrixXd X(101, 2);
    SplitMix64 rng(99);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
    for (const auto& plan :
         {shard_random(101, 4, 17), shard_by_covariate_sum(X, 4)}) {
        std::set<std::uint64_t> seen;
        for (int k = 0; k < plan.K; ++k)
            for (std::uint64_t r : plan.worker_rows(k)) CHECK(seen.insert(r).second);
        CHECK(seen.size() == 101);
    }
    const auto plan = shard_by_covariate_sum(X, 4);
    double prev = -1e300;
    for (int k = 0; k < plan.K; ++k) {
        double sum = 0.0;
        const auto rows = plan.worker_rows(k);
        for (std::uint64_t r : rows) sum += X.row(static_cast<Eigen::Index>(r)).sum();
        const double mean_z = sum / static_cast<double>(rows.size());
        CHECK(mean_z >= prev);
        prev = mean_z;
    }
}

TEST_CASE("allocate_pilot largest remainder") {
    CHECK(allocate_pilot({100, 300}, 40) == std::vector<std::uint64_t>{10, 30});
    CHECK(allocate_pilot({3, 3, 4}, 10) == std::vector<std::uint64_t>{3, 3, 4});
    // Equal remainders: lower worker index wins the extra unit.
    CHECK(allocate_pilot({5, 5}, 3) == std::vector<std::uint64_t>{2, 1});
}

TEST_CASE("srswor draws distinct in-range rows") {
    const auto picks = srswor(20, 7, 123);
    CHECK(picks.size() == 7);
    std::set<std::uint64_t> uniq(picks.begin(), picks.end());
    CHECK(uniq.size() == 7);
    for (std::uint64_t r : picks) CHECK(r < 20);
    CHECK(srswor(20, 7, 123) == picks);
    CHECK(srswor(20, 20, 5).size() == 20);
}

TEST_CASE("draw_pilot structure and census") {
    const auto plan = shard_random(20, 2, 31);
    const auto sizes = plan.shard_sizes();
    {
        const auto pilot = draw_pilot(plan, sizes, 20, 7);
        std::size_t total = 0;
        for (const auto& ids : pilot.per_worker_ids) total += ids.size();
        CHECK(total == 20);
    }
    const auto pilot = draw_pilot(plan, sizes, 6, 7);
    std::size_t total = 0;
    for (int k = 0; k < plan.K; ++k) {
        const auto rows = plan.worker_rows(k);
        const std::set<std::uint64_t> shard_rows(rows.begin(), rows.end());
        std::set<std::uint64_t> uniq;
        for (std::uint64_t id : pilot.per_worker_ids[static_cast<std::size_t>(k)]) {
            CHECK(shard_rows.count(id) == 1);
            CHECK(uniq.insert(id).second);
        }
        total += uniq.size();
    }
    CHECK(total == 6);
}

TEST_CASE("pilot inclusion probability is n_k/N_k") {
    // sizes (10,10), n=4 ->imarginal inclusion 0.2 per row; 10,000 draws.
    const auto plan = shard_random(20, 2, 77);
    const auto sizes = plan.shard_sizes();
    std::vector<int> hits(20, 0);
    for (std::uint64_t s = 0; s < 10000; ++s) {
        const auto pilot = draw_pilot(plan, sizes, 4, s);
        for (const auto& ids : pilot.per_worker_ids)
            for (std::uint64_t id : ids) ++hits[static_cast<std::size_t>(id)];
    }
    for (int h : hits) {
        const double rate = h / 10000.0;
        CHECK(rate >= 0.17);
        CHECK(rate <= 0.23);
    }
}

TEST_CASE("rng determinism and substreams") {
    SplitMix64 a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    bool differs = false;
    SplitMix64 a2(42);
    for (int i = 0; i < 100; ++i) differs |= a2.next() != c.next();
    CHECK(differs);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
