#include <doctest.h>

#include "oglm/chi2.hpp"
#include "oracles.hpp"

using namespace oglm;

TEST_CASE("chi2_sf closed forms") {
    CHECK(chi2_sf(0.0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(chi2_sf(0.0, 7) == doctest::Approx(1.0).epsilon(1e-15));
    // df=2 is exactly exp(-x/2).
    CHECK(chi2_sf(1.386294, 2) == doctest::Approx(0.5).epsilon(1e-6));
    for (double x : {0.3, 2.0, 9.0})
        CHECK(chi2_sf(x, 2) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-12));
    CHECK(chi2_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK_THROWS(chi2_sf(-1.0, 1));
}

TEST_CASE("chi2_sf against the quadrature oracle") {
    for (int df : {1, 2, 5, 10, 50})
        for (double x : {0.1, 1.0, 3.84, 10.0, 100.0}) {
            const double ours = chi2_sf(x, df);
            const double ref = oracles::chi2_sf_quadrature(x, df);
            CHECK(std::abs(ours - ref) <= 1e-8);
        }
}

TEST_CASE("chi2_sf monotone decreasing and bounded") {
    for (int df : {1, 3, 8, 20}) {
        double prev = 1.1;
        for (double x = 0.0; x <= 60.0; x += 0.5) {
            const double v = chi2_sf(x, df);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v < prev + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("chi2_quantile inverts chi2_sf") {
    CHECK(chi2_quantile(0.05, 1) == doctest::Approx(3.841459).epsilon(1e-5));
    for (int df : {1, 2, 5, 10})
        for (double alpha : {0.01, 0.05, 0.5}) {
            const double q = chi2_quantile(alpha, df);
            CHECK(chi2_sf(q, df) == doctest::Approx(alpha).epsilon(1e-8));
        }
}
