#include <doctest.h>

#include "oglm/estimators.hpp"
#include "oglm/master.hpp"
#include "oglm/simulate.hpp"
#include "oracles.hpp"

using namespace oglm;

TEST_CASE("pilot_estimate") {
    const DataShard data = oracles::random_shard(Family::Logistic, 150, 2, 31);
    const auto pilot = pilot_estimate(Family::Logistic, data);
    const auto global = fit_mle(Family::Logistic, data);
    CHECK(pilot.kind == EstimatorKind::Pilot);
    CHECK((pilot.beta - global.beta).cwiseAbs().maxCoeff() <= 1e-10);

    DataShard tiny;
    tiny.y = data.y.head(8);
    tiny.X = data.X.topRows(8);  // 8 < 5*2 rows
    CHECK_THROWS_AS(pilot_estimate(Family::Logistic, tiny), PilotTooSmallError);
}

TEST_CASE("one_step_estimate examples") {
    const DataShard data = oracles::random_shard(Family::Logistic, 200, 3, 32);
    {
        // Newton fixed point: starting at the exact MLE moves nowhere.
        const auto mle = fit_mle(Family::Logistic, data);
        const auto step = one_step_estimate(mle.beta, derivatives(Family::Logistic, data, mle.beta));
        CHECK(step.kind == EstimatorKind::OneStep);
        CHECK((step.beta - mle.beta).cwiseAbs().maxCoeff() <= 10.0 * kDefaultTol);
    }
    {
        // d=1 Poisson, one row y=2, x=1, pilot beta 0: mu=1, score=1, info=1.
        DataShard row;
        row.y.resize(1);
        row.X.resize(1, 1);
        row.y << 2;
        row.X << 1;
        row.row_ids = {0};
        const auto step =
            one_step_estimate(VectorXd::Zero(1), derivatives(Family::Poisson, row, VectorXd::Zero(1)));
        CHECK(step.beta(0) == doctest::Approx(1.0).epsilon(1e-12));
        // Brute-force reference Newton step on the same bundle.
        const auto bundle = derivatives(Family::Poisson, row, VectorXd::Zero(1));
        CHECK(step.beta(0) ==
              doctest::Approx(0.0 + bundle.score(0) / bundle.info(0, 0)).epsilon(1e-15));
    }
    {
        DerivativeBundle bundle = DerivativeBundle::zero(3);
        bundle.info = MatrixXd::Identity(3, 3);
        bundle.score << 0.5, -1.0, 2.0;
        VectorXd pilot(3);
        pilot << 1, 1, 1;
        const auto step = one_step_estimate(pilot, bundle);
        CHECK((step.beta - (pilot + bundle.score)).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("one_shot_estimate") {
    auto fit = [](VectorXd beta) {
        EstimateResult r;
        r.beta = std::move(beta);
        r.converged = true;
        return r;
    };
    {
        VectorXd a = VectorXd::Zero(3), b = VectorXd::Constant(3, 2.0);
        const auto avg = one_shot_estimate({fit(a), fit(b)}, OneShotWeights::Equal, {5, 5});
        CHECK(avg.kind == EstimatorKind::OneShot);
        CHECK((avg.beta - VectorXd::Ones(3)).cwiseAbs().maxCoeff() <= 1e-15);
    }
    {
        VectorXd a = VectorXd::Ones(2);
        const auto only = one_shot_estimate({fit(a)}, OneShotWeights::Equal, {7});
        CHECK((only.beta - a).cwiseAbs().maxCoeff() <= 1e-15);
    }
    {
        auto bad = fit(VectorXd::Zero(2));
        bad.converged = false;
        try {
            one_shot_estimate({fit(VectorXd::Zero(2)), bad, bad}, OneShotWeights::Equal,
                              {3, 3, 3});
            FAIL("expected OneShotUnavailableError");
        } catch (const OneShotUnavailableError& e) {
            CHECK(e.failed_workers == std::vector<int>{1, 2});
        }
    }
}

TEST_CASE("one-shot of identical shards equals the local (= global) MLE") {
    const DataShard shard = oracles::random_shard(Family::Poisson, 80, 2, 33);
    const auto local = fit_mle(Family::Poisson, shard);
    const auto avg = one_shot_estimate({local, local}, OneShotWeights::Equal, {80, 80});
    CHECK((avg.beta - local.beta).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("csl_estimate degenerate cases") {
    const DataShard data = oracles::random_shard(Family::Logistic, 250, 3, 34);
    const auto global = fit_mle(Family::Logistic, data);
    {
        // K=1: the anchor is the full data and the correction vanishes.
        const auto anchor = fit_mle(Family::Logistic, data);
        const VectorXd grad =
            derivatives(Family::Logistic, data, anchor.beta).score / 250.0;
        const auto csl = csl_estimate(Family::Logistic, data, anchor.beta, grad);
        CHECK(csl.kind == EstimatorKind::CSL);
        CHECK((csl.beta - global.beta).cwiseAbs().maxCoeff() <= 1e-8);
    }
    {
        // Identical shards: global score per row equals the anchor's.
        const auto anchor = fit_mle(Family::Logistic, data);
        DataShard doubled;
        doubled.y.resize(500);
        doubled.X.resize(500, 3);
        doubled.y << data.y, data.y;
        doubled.X << data.X, data.X;
        const VectorXd grad =
            derivatives(Family::Logistic, doubled, anchor.beta).score / 500.0;
        const auto csl = csl_estimate(Family::Logistic, data, anchor.beta, grad);
        CHECK((csl.beta - anchor.beta).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("scaling equivariance of Global, Pilot and OneStep") {
    for (Family family : {Family::Logistic, Family::Poisson}) {
        const DataShard data =
            oracles::random_shard(family, 200, 3, family == Family::Logistic ? 35 : 36);
        DataShard scaled = data;
        const double c = 4.0;
        scaled.X.col(1) *= c;

        const auto g0 = fit_mle(family, data);
        const auto g1 = fit_mle(family, scaled);
        CHECK(std::abs(g1.beta(1) - g0.beta(1) / c) <= 1e-8);
        CHECK(std::abs(g1.beta(0) - g0.beta(0)) <= 1e-7);

        const auto p0 = pilot_estimate(family, data);
        const auto p1 = pilot_estimate(family, scaled);
        CHECK(std::abs(p1.beta(1) - p0.beta(1) / c) <= 1e-8);

        VectorXd start0 = 0.5 * g0.beta, start1 = start0;
        start1(1) /= c;
        const auto s0 = one_step_estimate(start0, derivatives(family, data, start0));
        const auto s1 = one_step_estimate(start1, derivatives(family, scaled, start1));
        CHECK(std::abs(s1.beta(1) - s0.beta(1) / c) <= 1e-8);
        CHECK(std::abs(s1.beta(0) - s0.beta(0)) <= 1e-7);
    }
}
