#ifndef OGLM_FAMILY_HPP
#define OGLM_FAMILY_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>

#include "oglm/errors.hpp"

namespace oglm {

// Response families under their canonical links. Dispersion is fixed at 1,
// so the variance function V(mu) is the response variance.
enum class Family : std::uint8_t { Logistic = 0, Poisson = 1 };

inline std::string family_name(Family f) {
    return f == Family::Logistic ? "logistic" : "poisson";
}

// Linear predictors are clamped here before exponentiation in the Poisson
// family; the counter records how often that fired (wandering pilot fits on
// tiny samples can push eta out of range).
inline std::atomic<std::uint64_t>& eta_clamp_count() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

constexpr double kEtaClampMax = 700.0;

inline double clamp_eta(double eta) {
    if (eta > kEtaClampMax) {
        eta_clamp_count().fetch_add(1, std::memory_order_relaxed);
        return kEtaClampMax;
    }
    return eta;
}

// Canonical inverse link: mean as a function of the linear predictor.
inline double mean(Family f, double eta) {
    if (!std::isfinite(eta)) throw std::domain_error("mean: eta must be finite");
    if (f == Family::Logistic) {
        // Branch on sign so exp never overflows.
        if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
        const double e = std::exp(eta);
        return e / (1.0 + e);
    }
    return std::exp(clamp_eta(eta));
}

inline double variance_fn(Family f, double mu) {
    if (f == Family::Logistic) {
        if (!(mu >= 0.0 && mu <= 1.0))
            throw std::domain_error("variance_fn: logistic mean outside [0,1]");
        return mu * (1.0 - mu);
    }
    if (!(mu >= 0.0)) throw std::domain_error("variance_fn: poisson mean negative");
    return mu;
}

// Per-row log-likelihood kernel y*eta - g(eta); the c(y, phi) constants are
// dropped everywhere (they cancel in every likelihood ratio).
inline double log_lik_row(Family f, double y, double eta) {
    if (f == Family::Logistic) {
        // ln(1 + exp(eta)) evaluated without overflow.
        const double softplus =
            eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        return y * eta - softplus;
    }
    return y * eta - std::exp(clamp_eta(eta));
}

}  // namespace oglm

#endif  // OGLM_FAMILY_HPP
