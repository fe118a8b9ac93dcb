// Independent reference implementations used only by tests: finite-difference
// derivatives, a quadrature chi-square tail, and small random problem
// factories. Deliberately written differently from the library code.

#ifndef OGLM_TESTS_ORACLES_HPP
#define OGLM_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>

#include "oglm/glm.hpp"
#include "oglm/rng.hpp"

namespace oracles {

using oglm::DataShard;
using oglm::Family;
using oglm::MatrixXd;
using oglm::VectorXd;

inline VectorXd fd_score(Family family, const DataShard& shard, const VectorXd& beta,
                         double h = 1e-6) {
    VectorXd g(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        VectorXd up = beta, dn = beta;
        up(j) += h;
        dn(j) -= h;
        g(j) = (oglm::log_lik_kernel(family, shard, up) -
                oglm::log_lik_kernel(family, shard, dn)) /
               (2.0 * h);
    }
    return g;
}

// Negative finite-difference Jacobian of the score.
inline MatrixXd fd_info(Family family, const DataShard& shard, const VectorXd& beta,
                        double h = 1e-5) {
    MatrixXd H(beta.size(), beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        VectorXd up = beta, dn = beta;
        up(j) += h;
        dn(j) -= h;
        const VectorXd su = oglm::derivatives(family, shard, up).score;
        const VectorXd sd = oglm::derivatives(family, shard, dn).score;
        H.col(j) = -(su - sd) / (2.0 * h);
    }
    return H;
}

// Chi-square density, evaluated in log space so df=50 at x=100 stays exact.
inline double chi2_pdf(double x, int df) {
    if (x <= 0.0) return 0.0;
    const double a = 0.5 * df;
    return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

namespace detail {

inline double simpson(double a, double fa, double m, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(int df, double a, double fa, double b, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double fm = chi2_pdf(m, df);
    const double left = simpson(a, fa, 0.5 * (a + m), chi2_pdf(0.5 * (a + m), df), m, fm);
    const double right = simpson(m, fm, 0.5 * (m + b), chi2_pdf(0.5 * (m + b), df), b, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(df, a, fa, m, fm, left, 0.5 * tol, depth - 1) +
           adapt(df, m, fm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Upper-tail probability by adaptive Simpson quadrature of the density from
// x to a point where the remaining tail is negligible.
inline double chi2_sf_quadrature(double x, int df) {
    const double upper = x + df + 500.0;
    double total = 0.0;
    // Integrate piecewise so the quadrature never straddles the density's
    // near-origin curvature and its flat far tail in one panel.
    double a = x;
    const double cuts[] = {x + 1.0, x + 10.0, x + 50.0, upper};
    for (double b : cuts) {
        if (b <= a) continue;
        const double fa = chi2_pdf(a, df), fb = chi2_pdf(b, df);
        const double m = 0.5 * (a + b);
        const double whole = detail::simpson(a, fa, m, chi2_pdf(m, df), b, fb);
        total += detail::adapt(df, a, fa, b, fb, whole, 1e-13, 60);
        a = b;
    }
    return total;
}

// Small random GLM instances for derivative and equivalence checks.
inline DataShard random_shard(Family family, Eigen::Index m, Eigen::Index d,
                              std::uint64_t seed) {
    oglm::SplitMix64 rng(seed);
    DataShard shard;
    shard.y.resize(m);
    shard.X.resize(m, d);
    VectorXd beta(d);
    for (Eigen::Index j = 0; j < d; ++j) beta(j) = 0.8 * rng.normal();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) shard.X(i, j) = rng.normal();
        const double eta = shard.X.row(i).dot(beta);
        if (family == Family::Logistic)
            shard.y(i) = rng.uniform() < oglm::mean(Family::Logistic, eta) ? 1.0 : 0.0;
        else
            shard.y(i) = static_cast<double>(rng.poisson(std::exp(std::min(eta, 5.0))));
        shard.row_ids.push_back(static_cast<std::uint64_t>(i));
    }
    return shard;
}

inline VectorXd random_beta(Eigen::Index d, std::uint64_t seed, double scale = 0.5) {
    oglm::SplitMix64 rng(seed);
    VectorXd beta(d);
    for (Eigen::Index j = 0; j < d; ++j) beta(j) = scale * rng.normal();
    return beta;
}

}  // namespace oracles

#endif
