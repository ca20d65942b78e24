#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "simon/statfit.hpp"

using namespace simon;

namespace {

ScalingDataset synthetic(ScalingModel model, const std::vector<double>& params, double sigma,
                         Rng& rng, int points = 14) {
    std::vector<ScalingPoint> pts;
    for (int k = 0; k < points; ++k) {
        const double x = 1.0 + 0.75 * k;
        const double y = model_eval(model, params, x) + sigma * rng.next_normal();
        pts.push_back({x, y, std::max(sigma, 1e-6)});
    }
    return ScalingDataset(std::move(pts));
}

} // namespace

TEST_CASE("model_eval closed forms") {
    // NTS(N_w = 1) = 0 for every model and admissible parameters.
    CHECK(model_eval(ScalingModel::polylog, {2.0, 1.3}, 0.0) == 0.0);
    CHECK(model_eval(ScalingModel::poly, {0.5, 0.8}, 0.0) == 0.0);
    CHECK(model_eval(ScalingModel::mixed, {0.5, 0.8, 0.4}, 0.0) == 0.0);
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = 0.01 + rng.next_double() * 5.0;
        const double e = 0.01 + rng.next_double() * 3.0;
        const double g = rng.next_double();
        CHECK(model_eval(ScalingModel::polylog, {a, e}, 0.0) == 0.0);
        CHECK(model_eval(ScalingModel::poly, {a, e}, 0.0) == 0.0);
        CHECK(model_eval(ScalingModel::mixed, {a, e, g}, 0.0) == 0.0);
    }

    CHECK(model_eval(ScalingModel::polylog, {2.0, 1.5}, 4.0) ==
          doctest::Approx(2.0 * std::pow(4.0, 1.5)));
    // mixed gamma = 1 is the poly model with beta = C/ln2.
    for (double x : {0.5, 1.0, 3.0, 7.0})
        CHECK(model_eval(ScalingModel::mixed, {0.7, 0.4, 1.0}, x) ==
              doctest::Approx(model_eval(ScalingModel::poly, {0.7, 0.4 / std::log(2.0)}, x)));
    // mixed gamma = 0 scales like the polylog family: c[(1+x)^C - 1].
    for (double x : {0.5, 1.0, 3.0, 7.0})
        CHECK(model_eval(ScalingModel::mixed, {0.7, 1.9, 0.0}, x) ==
              doctest::Approx(0.7 * (std::pow(1.0 + x, 1.9) - 1.0)));

    CHECK_THROWS_AS(model_eval(ScalingModel::polylog, {-1.0, 1.0}, 1.0), UsageError);
    CHECK_THROWS_AS(model_eval(ScalingModel::poly, {0.0, 1.0}, 1.0), UsageError);
    CHECK_THROWS_AS(model_eval(ScalingModel::mixed, {1.0, 1.0, 1.5}, 1.0), UsageError);
    CHECK_THROWS_AS(model_eval(ScalingModel::polylog, {1.0}, 1.0), UsageError);
}

TEST_CASE("ScalingDataset validation and drop_first") {
    CHECK_THROWS_AS(ScalingDataset({{1.0, 1.0, 0.0}}), DataError);
    CHECK_THROWS_AS(ScalingDataset({{1.0, 1.0, 0.1}, {1.0, 2.0, 0.1}}), DataError);
    const ScalingDataset data({{1.0, 1.0, 0.1}, {2.0, 2.0, 0.1}, {3.0, 3.0, 0.1},
                               {4.0, 4.0, 0.1}, {5.0, 5.0, 0.1}, {6.0, 6.0, 0.1}});
    CHECK(data.drop_first(4).size() == 2);
    CHECK(data.drop_first(4).points().front().x == 5.0);
    CHECK_THROWS_AS(data.drop_first(6), UsageError);
}

TEST_CASE("fit recovers synthetic polylog truth") {
    Rng rng(101);
    int hits = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        const auto data = synthetic(ScalingModel::polylog, {2.0, 1.3}, 0.01, rng);
        const auto report = fit(ScalingModel::polylog, data);
        REQUIRE(report.params.size() == 2);
        if (std::abs(report.params[1] - 1.3) <= 3.0 * report.stderrs[1]) ++hits;
        CHECK(report.r2 > 0.999);
        CHECK(report.aicc >= report.aic);
        CHECK(report.dof == static_cast<int>(data.size()) - 2);
    }
    CHECK(hits >= trials - 2); // 3-stderr coverage with a little slack
}

TEST_CASE("perfect poly data gives essentially exact fit") {
    Rng rng(102);
    const auto data = synthetic(ScalingModel::poly, {0.4, 0.9}, 0.0, rng);
    const auto report = fit(ScalingModel::poly, data);
    CHECK(report.r2 >= 1.0 - 1e-9);
    CHECK(report.params[0] == doctest::Approx(0.4).epsilon(1e-4));
    CHECK(report.params[1] == doctest::Approx(0.9).epsilon(1e-4));
    CHECK(report.converged);
}

TEST_CASE("mixed model fit clamps gamma to the boundary on pure-family data") {
    Rng rng(103);
    const auto data = synthetic(ScalingModel::poly, {0.4, 0.9}, 1e-4, rng);
    const auto report = fit(ScalingModel::mixed, data);
    REQUIRE(report.params.size() == 3);
    CHECK(report.params[2] >= 0.0);
    CHECK(report.params[2] <= 1.0);
    CHECK(report.r2 > 0.9999);
}

TEST_CASE("AICc becomes infinite at minimal sample size") {
    // 3 points, 2 parameters: N - k - 1 = 0.
    const ScalingDataset tiny({{1.0, 2.0, 0.1}, {2.0, 4.5, 0.1}, {3.0, 7.5, 0.1}});
    const auto report = fit(ScalingModel::polylog, tiny);
    CHECK(std::isinf(report.aicc));
    CHECK(std::isfinite(report.aic));
    CHECK_THROWS_AS(fit(ScalingModel::polylog,
                        ScalingDataset({{1.0, 2.0, 0.1}, {2.0, 4.5, 0.1}})),
                    DataError);
}

TEST_CASE("akaike_weights") {
    const auto published = akaike_weights({-10.2, -0.3});
    CHECK(std::abs(published[0] - 0.9929) < 1e-4);
    CHECK(std::abs(published[1] - 0.0071) < 1e-4);

    const auto equal = akaike_weights({3.0, 3.0});
    CHECK(equal[0] == doctest::Approx(0.5));
    CHECK(equal[1] == doctest::Approx(0.5));

    const auto big_gap = akaike_weights({-17.9, 10.4}); // delta = 28.3
    CHECK(big_gap[0] == doctest::Approx(1.0 - 7.2e-7).epsilon(1e-8));

    // Invariance under adding a constant.
    const auto base = akaike_weights({1.0, 4.0, 2.5});
    const auto shifted = akaike_weights({101.0, 104.0, 102.5});
    for (std::size_t k = 0; k < base.size(); ++k)
        CHECK(base[k] == doctest::Approx(shifted[k]).epsilon(1e-12));
    double total = 0.0;
    for (double v : base) total += v;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("bootstrap_nts") {
    Rng rng(104);
    const auto constant = bootstrap_nts({5.0, 5.0, 5.0, 5.0}, 2000, rng);
    CHECK(constant.mean == doctest::Approx(5.0));
    CHECK(constant.sigma == doctest::Approx(0.0));

    const std::vector<double> replicas = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto boot = bootstrap_nts(replicas, 100000, rng);
    CHECK(std::abs(boot.mean - 5.0) < 3.0 * boot.sigma);
    // sigma approximates sample std / sqrt(9); population std of 1..9 is
    // sqrt(60/9).
    const double expected_sigma = std::sqrt(60.0 / 9.0) / 3.0;
    CHECK(boot.sigma == doctest::Approx(expected_sigma).epsilon(0.1));
    CHECK_THROWS_AS(bootstrap_nts({1.0}, 100, rng), UsageError);
}

TEST_CASE("model_select majority vote") {
    Rng rng(105);
    const auto data = synthetic(ScalingModel::polylog, {1.5, 1.2}, 0.02, rng);
    const auto verdict =
        model_select(fit(ScalingModel::polylog, data), fit(ScalingModel::poly, data));
    REQUIRE(verdict.votes.size() == 7);
    CHECK(verdict.polylog_votes + verdict.poly_votes <= 7);
    CHECK(verdict.majority == Verdict::polylog);
    CHECK(verdict.polylog_akaike_weight > 0.5);

    const auto data2 = synthetic(ScalingModel::poly, {0.2, 1.0}, 0.02, rng);
    const auto verdict2 =
        model_select(fit(ScalingModel::polylog, data2), fit(ScalingModel::poly, data2));
    CHECK(verdict2.majority == Verdict::poly);

    CHECK_THROWS_AS(model_select(fit(ScalingModel::poly, data), fit(ScalingModel::poly, data)),
                    UsageError);
}

TEST_CASE("transition_weight scans ascending w") {
    CHECK(transition_weight({{1, Verdict::polylog},
                             {2, Verdict::polylog},
                             {3, Verdict::poly},
                             {4, Verdict::polylog}}) == 3);
    CHECK(transition_weight({{2, Verdict::poly}, {1, Verdict::polylog}}) == 2);
    CHECK_FALSE(transition_weight({{1, Verdict::polylog}, {2, Verdict::tie}}).has_value());
}

TEST_CASE("objective never increases across accepted Gauss-Newton steps") {
    // Indirect check: the final weighted SS is no worse than the best pure
    // grid start it was seeded with.
    Rng rng(106);
    const auto data = synthetic(ScalingModel::polylog, {2.0, 0.8}, 0.05, rng);
    const auto report = fit(ScalingModel::polylog, data);
    double grid_best = std::numeric_limits<double>::infinity();
    for (double a : {0.5, 1.0, 2.0, 4.0})
        for (double e : {0.25, 0.5, 1.0, 2.0}) {
            double ss = 0.0;
            for (const auto& pt : data.points()) {
                const double r = (pt.y - model_eval(ScalingModel::polylog, {a, e}, pt.x)) /
                                 pt.sigma;
                ss += r * r;
            }
            grid_best = std::min(grid_best, ss);
        }
    CHECK(report.ss_res <= grid_best + 1e-9);
}
