#ifndef OGLM_SHARDING_HPP
#define OGLM_SHARDING_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "oglm/errors.hpp"
#include "oglm/rng.hpp"
#include "oglm/types.hpp"

namespace oglm {

enum class ShardStrategy : std::uint8_t { Random = 0, CovariateSumOrdered = 1 };

inline std::string strategy_name(ShardStrategy s) {
    return s == ShardStrategy::Random ? "random" : "nonrandom";
}

struct PartitionPlan {
    std::vector<int> assignments;  // worker index per observation
    int K = 1;
    ShardStrategy strategy = ShardStrategy::Random;

    std::vector<std::uint64_t> shard_sizes() const {
        std::vector<std::uint64_t> sizes(static_cast<std::size_t>(K), 0);
        for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
        return sizes;
    }

    // Global row ids of worker k, ascending.
    std::vector<std::uint64_t> worker_rows(int k) const {
        std::vector<std::uint64_t> out;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] == k) out.push_back(static_cast<std::uint64_t>(i));
        return out;
    }
};

struct PilotSample {
    std::vector<std::vector<std::uint64_t>> per_worker_ids;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

// Random sharding: a seeded uniform permutation cut into K near-equal
// contiguous blocks (block sizes differ by at most one).
inline PartitionPlan shard_random(std::uint64_t N, int K, std::uint64_t seed) {
    if (K < 1 || static_cast<std::uint64_t>(K) > N)
        throw ConfigError("shard_random: need 1 <= K <= N");
    std::vector<std::uint64_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    SplitMix64 rng(seed);
    for (std::uint64_t i = N; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(i)]);
    PartitionPlan plan;
    plan.K = K;
    plan.strategy = ShardStrategy::Random;
    plan.assignments.assign(N, 0);
    const std::uint64_t base = N / static_cast<std::uint64_t>(K);
    const std::uint64_t extra = N % static_cast<std::uint64_t>(K);
    std::uint64_t pos = 0;
    for (int k = 0; k < K; ++k) {
        const std::uint64_t size = base + (static_cast<std::uint64_t>(k) < extra ? 1 : 0);
        for (std::uint64_t j = 0; j < size; ++j) plan.assignments[perm[pos++]] = k;
    }
    return plan;
}

// Nonrandom sharding: order observations by the covariate sum Z_i (ties by
// original index) and give worker floor(rank*K/N) the rank-th order
// statistic. Deterministic.
inline PartitionPlan shard_by_covariate_sum(const MatrixXd& X, int K) {
    const std::uint64_t N = static_cast<std::uint64_t>(X.rows());
    if (K < 1 || static_cast<std::uint64_t>(K) > N)
        throw ConfigError("shard_by_covariate_sum: need 1 <= K <= N");
    const VectorXd z = X.rowwise().sum();
    std::vector<std::uint64_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint64_t a, std::uint64_t b) { return z(a) < z(b); });
    PartitionPlan plan;
    plan.K = K;
    plan.strategy = ShardStrategy::CovariateSumOrdered;
    plan.assignments.assign(N, 0);
    for (std::uint64_t rank = 0; rank < N; ++rank)
        plan.assignments[order[rank]] =
            static_cast<int>(rank * static_cast<std::uint64_t>(K) / N);
    return plan;
}

// SRSWOR of n of m positions by partial Fisher-Yates; selected positions are
// returned ascending.
inline std::vector<std::uint64_t> srswor(std::uint64_t m, std::uint64_t n, std::uint64_t seed) {
    if (n > m) throw ConfigError("srswor: n > m");
    std::vector<std::uint64_t> pool(m);
    std::iota(pool.begin(), pool.end(), 0);
    SplitMix64 rng(seed);
    for (std::uint64_t i = 0; i < n; ++i)
        std::swap(pool[i], pool[i + rng.below(m - i)]);
    pool.resize(n);
    std::sort(pool.begin(), pool.end());
    return pool;
}

// Proportional allocation of n across shard sizes by the largest-remainder
// method; ties go to the lower worker index.
inline std::vector<std::uint64_t> allocate_pilot(const std::vector<std::uint64_t>& sizes,
                                                 std::uint64_t n) {
    const std::uint64_t N = std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0});
    if (n < 1 || n > N) throw ConfigError("allocate_pilot: need 1 <= n <= N");
    const int K = static_cast<int>(sizes.size());
    std::vector<std::uint64_t> alloc(sizes.size());
    std::vector<std::pair<double, int>> remainders;
    std::uint64_t assigned = 0;
    for (int k = 0; k < K; ++k) {
        const double quota =
            static_cast<double>(n) * static_cast<double>(sizes[k]) / static_cast<double>(N);
        alloc[k] = static_cast<std::uint64_t>(quota);
        assigned += alloc[k];
        remainders.emplace_back(quota - static_cast<double>(alloc[k]), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::uint64_t i = 0; assigned < n; ++i) {
        ++alloc[static_cast<std::size_t>(remainders[i % remainders.size()].second)];
        ++assigned;
    }
    for (int k = 0; k < K; ++k)
        if (alloc[k] > sizes[k])
            throw AllocationError("allocate_pilot: worker " + std::to_string(k) +
                                      " allocated more than it holds",
                                  k);
    return alloc;
}

// Stratified pilot draw: proportional allocation, then SRSWOR inside each
// worker on an independent derived stream.
inline PilotSample draw_pilot(const PartitionPlan& plan,
                              const std::vector<std::uint64_t>& shard_sizes, std::uint64_t n,
                              std::uint64_t seed) {
    const auto alloc = allocate_pilot(shard_sizes, n);
    PilotSample pilot;
    pilot.n = n;
    pilot.seed = seed;
    pilot.per_worker_ids.resize(shard_sizes.size());
    for (int k = 0; k < plan.K; ++k) {
        const auto rows = plan.worker_rows(k);
        const auto picks = srswor(rows.size(), alloc[k], derive_seed(seed, k));
        for (std::uint64_t p : picks) pilot.per_worker_ids[k].push_back(rows[p]);
    }
    return pilot;
}

}  // namespace oglm

#endif  // OGLM_SHARDING_HPP
