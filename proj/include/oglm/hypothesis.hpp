#ifndef OGLM_HYPOTHESIS_HPP
#define OGLM_HYPOTHESIS_HPP

#include <algorithm>
#include <utility>
#include <vector>

#include "oglm/types.hpp"

namespace oglm {

// A point restriction beta[index] = value for each listed coordinate; the
// remaining coordinates are free.
struct Hypothesis {
    std::vector<std::pair<int, double>> restricted;

    int s() const { return static_cast<int>(restricted.size()); }

    void validate(Eigen::Index d) const {
        if (restricted.empty() || static_cast<Eigen::Index>(restricted.size()) > d)
            throw ConfigError("Hypothesis: need 1 <= s <= d restricted coordinates");
        std::vector<int> idx;
        for (const auto& [i, v] : restricted) {
            (void)v;
            if (i < 0 || i >= d) throw ConfigError("Hypothesis: index out of range");
            idx.push_back(i);
        }
        std::sort(idx.begin(), idx.end());
        if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
            throw ConfigError("Hypothesis: duplicate restricted index");
    }

    bool is_fixed(int j) const {
        for (const auto& [i, v] : restricted) {
            (void)v;
            if (i == j) return true;
        }
        return false;
    }

    std::vector<int> free_indices(Eigen::Index d) const {
        std::vector<int> out;
        for (int j = 0; j < d; ++j)
            if (!is_fixed(j)) out.push_back(j);
        return out;
    }
};

// Full-length vector with fixed coordinates at their hypothesized values and
// free coordinates taken from `free_vec` in ascending index order.
inline VectorXd expand_free(const Hypothesis& hyp, Eigen::Index d, const VectorXd& free_vec) {
    VectorXd full(d);
    for (const auto& [i, v] : hyp.restricted) full(i) = v;
    const auto free_idx = hyp.free_indices(d);
    if (static_cast<Eigen::Index>(free_idx.size()) != free_vec.size())
        throw ShapeError("expand_free: free vector length mismatch");
    for (std::size_t j = 0; j < free_idx.size(); ++j) full(free_idx[j]) = free_vec(j);
    return full;
}

inline VectorXd reduce_free(const Hypothesis& hyp, Eigen::Index d, const VectorXd& full) {
    if (full.size() != d) throw ShapeError("reduce_free: length mismatch");
    const auto free_idx = hyp.free_indices(d);
    VectorXd out(static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t j = 0; j < free_idx.size(); ++j) out(j) = full(free_idx[j]);
    return out;
}

// Delete restricted rows/columns of a bundle, keeping free coordinates only.
inline DerivativeBundle reduce_bundle(const Hypothesis& hyp, const DerivativeBundle& bundle) {
    const Eigen::Index d = bundle.score.size();
    const auto free_idx = hyp.free_indices(d);
    const Eigen::Index f = static_cast<Eigen::Index>(free_idx.size());
    DerivativeBundle out;
    out.score.resize(f);
    out.info.resize(f, f);
    for (Eigen::Index a = 0; a < f; ++a) {
        out.score(a) = bundle.score(free_idx[a]);
        for (Eigen::Index b = 0; b < f; ++b) out.info(a, b) = bundle.info(free_idx[a], free_idx[b]);
    }
    out.log_lik = bundle.log_lik;
    out.count = bundle.count;
    return out;
}

}  // namespace oglm

#endif  // OGLM_HYPOTHESIS_HPP
