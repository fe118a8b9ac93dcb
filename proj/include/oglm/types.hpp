#ifndef OGLM_TYPES_HPP
#define OGLM_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "oglm/errors.hpp"
#include "oglm/family.hpp"

namespace oglm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// One worker's rows: responses, covariates, and the global observation ids
// the rows came from.
struct DataShard {
    VectorXd y;
    MatrixXd X;  // m x d
    std::vector<std::uint64_t> row_ids;

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }

    void check() const {
        if (y.size() != X.rows())
            throw ShapeError("DataShard: y length != X row count");
        if (!row_ids.empty() && static_cast<Eigen::Index>(row_ids.size()) != X.rows())
            throw ShapeError("DataShard: row_ids length != X row count");
    }
};

enum class EstimatorKind : std::uint8_t { Global, Pilot, OneStep, OneShot, CSL };

inline std::string estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Global: return "GO";
        case EstimatorKind::Pilot: return "Pilot";
        case EstimatorKind::OneStep: return "One-Step";
        case EstimatorKind::OneShot: return "OS";
        case EstimatorKind::CSL: return "CSL";
    }
    return "?";
}

struct EstimateResult {
    VectorXd beta;
    double log_lik = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    double final_step_norm = std::numeric_limits<double>::quiet_NaN();
    EstimatorKind kind = EstimatorKind::Global;
    // Broadcast/aggregate rounds spent producing this estimate (0 for
    // purely local fits).
    int rounds = 0;
};

// A worker's (score, information, log-likelihood, row count) at a broadcast
// beta. Additive across disjoint row sets.
struct DerivativeBundle {
    VectorXd score;
    MatrixXd info;
    double log_lik = 0.0;
    std::uint64_t count = 0;

    static DerivativeBundle zero(Eigen::Index d) {
        DerivativeBundle b;
        b.score = VectorXd::Zero(d);
        b.info = MatrixXd::Zero(d, d);
        return b;
    }

    DerivativeBundle& operator+=(const DerivativeBundle& other) {
        if (score.size() != other.score.size())
            throw ShapeError("DerivativeBundle: dimension mismatch in +=");
        score += other.score;
        info += other.info;
        log_lik += other.log_lik;
        count += other.count;
        return *this;
    }
};

}  // namespace oglm

#endif  // OGLM_TYPES_HPP
