#ifndef OGLM_GENERATORS_HPP
#define OGLM_GENERATORS_HPP

#include <cstdint>
#include <string>

#include "oglm/family.hpp"
#include "oglm/rng.hpp"
#include "oglm/types.hpp"

namespace oglm {

enum class CovariateLaw : std::uint8_t { StdNormal, Uniform01, InterceptPlusUniform01 };

inline std::string covariate_law_name(CovariateLaw law) {
    switch (law) {
        case CovariateLaw::StdNormal: return "std-normal";
        case CovariateLaw::Uniform01: return "uniform01";
        case CovariateLaw::InterceptPlusUniform01: return "intercept+uniform01";
    }
    return "?";
}

inline MatrixXd gen_covariates(std::uint64_t N, Eigen::Index d, CovariateLaw law,
                               SplitMix64& rng) {
    MatrixXd X(static_cast<Eigen::Index>(N), d);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            switch (law) {
                case CovariateLaw::StdNormal: X(i, j) = rng.normal(); break;
                case CovariateLaw::Uniform01: X(i, j) = rng.uniform(); break;
                case CovariateLaw::InterceptPlusUniform01:
                    X(i, j) = (j == 0) ? 1.0 : rng.uniform();
                    break;
            }
        }
    }
    return X;
}

// Bernoulli responses with P(Y=1) = expit(X beta).
inline DataShard gen_logistic(std::uint64_t N, const VectorXd& beta, CovariateLaw law,
                              std::uint64_t seed) {
    SplitMix64 rng(seed);
    DataShard data;
    data.X = gen_covariates(N, beta.size(), law, rng);
    data.y.resize(data.X.rows());
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
        const double p = mean(Family::Logistic, data.X.row(i).dot(beta));
        data.y(i) = rng.uniform() < p ? 1.0 : 0.0;
    }
    data.row_ids.resize(N);
    for (std::uint64_t i = 0; i < N; ++i) data.row_ids[i] = i;
    return data;
}

// Poisson responses with rate exp(X beta).
inline DataShard gen_poisson(std::uint64_t N, const VectorXd& beta, CovariateLaw law,
                             std::uint64_t seed) {
    SplitMix64 rng(seed);
    DataShard data;
    data.X = gen_covariates(N, beta.size(), law, rng);
    data.y.resize(data.X.rows());
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
        const double lambda = mean(Family::Poisson, data.X.row(i).dot(beta));
        data.y(i) = static_cast<double>(rng.poisson(lambda));
    }
    data.row_ids.resize(N);
    for (std::uint64_t i = 0; i < N; ++i) data.row_ids[i] = i;
    return data;
}

inline DataShard gen_data(Family family, std::uint64_t N, const VectorXd& beta,
                          CovariateLaw law, std::uint64_t seed) {
    return family == Family::Logistic ? gen_logistic(N, beta, law, seed)
                                      : gen_poisson(N, beta, law, seed);
}

}  // namespace oglm

#endif  // OGLM_GENERATORS_HPP
