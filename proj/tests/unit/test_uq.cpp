#include "doctest.h"

#include "driftlab/drift_presets.hpp"
#include "driftlab/elliptic.hpp"
#include "driftlab/error.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/sde.hpp"
#include "driftlab/uq.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace driftlab;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

TestFunction cos_fn(int d = 1)
{
    return {"cos", {d, [](const Point& x) { return std::cos(kTwoPi * x[0]); }}};
}

TestFunction sin_fn(int d = 1)
{
    return {"sin", {d, [](const Point& x) { return std::sin(kTwoPi * x[0]); }}};
}

/// Random element of V_J with d components in multiresolution coordinates.
CoefficientField random_field(const BasisSpec& spec, double scale, std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixXd v(static_cast<Eigen::Index>(spec.size()), spec.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v.data()[i] = scale * rng.normal();
    return {spec, Coords::Multiresolution, v};
}

StudyConfig quick_config(const DriftModel& truth)
{
    StudyConfig cfg;
    cfg.dim = truth.dim;
    cfg.truth = truth;
    cfg.delta = 1e-2;
    cfg.horizons = {200.0};
    cfg.replications = 1;
    return cfg;
}

} // namespace

TEST_CASE("drift presets")
{
    for (const auto& name : drift_preset_names()) {
        const int d = name == "divfree_perturbed" ? 2 : 3;
        const DriftModel m = drift_preset(name, d, 0.4);
        CHECK(m.dim == d);
        const Point b = m(Point{0.1, 0.7, 0.3});
        for (int j = 0; j < d; ++j)
            CHECK(std::isfinite(b[j]));
        if (m.potential) {
            // b = grad B by central differences
            const double h = 1e-6;
            for (int j = 0; j < d; ++j) {
                Point xp{0.1, 0.7, 0.3}, xm = xp;
                xp[j] += h;
                xm[j] -= h;
                CHECK(b[j] == doctest::Approx(((*m.potential)(xp) - (*m.potential)(xm)) / (2 * h)).epsilon(1e-6));
            }
        }
    }
    CHECK(drift_preset("gradient_cos", 1, 0.5).hash() != drift_preset("gradient_cos", 1, 0.25).hash());
    CHECK(drift_preset("zero", 2).hash() == drift_preset("zero", 2, 7.0).hash());
    CHECK_THROWS_AS(drift_preset("swirl", 1), ConfigError);
    CHECK_THROWS_AS(drift_preset("divfree_perturbed", 1), ConfigError);
    CHECK_THROWS_AS(drift_preset("zero", 4), ConfigError);

    // the divergence-free perturbation keeps the gradient invariant measure
    const auto mu = invariant_measure(drift_preset("divfree_perturbed", 2, 0.5).field, 16);
    const auto oracle = gradient_oracle(*drift_preset("gradient_cos", 2, 0.5).potential, 16);
    CHECK((mu.density - oracle.density).l2_norm() < 1e-5 * oracle.density.l2_norm());

    const auto spec = build_basis(Family::Daubechies, 2, 1, 4);
    const auto c = random_field(spec, 1.0, 5);
    const DriftModel fm = drift_from_coefficients(c);
    CHECK(fm(Point{0.3, 0, 0})[0] == doctest::Approx(synthesize(c, Point{0.3, 0, 0})[0]));
}

TEST_CASE("sample summaries")
{
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(quantile({0.0, 10.0}, 0.3) == doctest::Approx(3.0));
    CHECK(sample_mean({1.0, 2.0, 6.0}) == 3.0);
    CHECK(sample_variance({1.0, 2.0, 6.0}) == doctest::Approx(7.0));
    CHECK(ls_slope({0.0, 1.0, 2.0}, {1.0, -1.0, -3.0}) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(median({}), StatisticsError);
    CHECK_THROWS_AS(sample_variance({1.0}), StatisticsError);
}

TEST_CASE("study configuration")
{
    StudyConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.horizons = {100.0, 100.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.horizons = {100.0};
    cfg.replications = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.replications = 1;
    cfg.alpha = -0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.alpha = 0.0;
    cfg.truth = drift_preset("zero", 2);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    StudyConfig a, b;
    CHECK(a.hash() == b.hash());
    b.seed = 2;
    CHECK(a.hash() != b.hash());
    CHECK(a.replication_seed(0, 1) != a.replication_seed(1, 0));
    CHECK(a.prior_for(4000.0).level == 2);
    a.level = 5;
    CHECK(a.basis_for(4000.0).level() == 5);
}

TEST_CASE("rate study")
{
    StudyConfig cfg = quick_config(drift_preset("zero", 1));
    cfg.horizons = {100.0, 400.0};
    cfg.replications = 10;
    CHECK_THROWS_AS(rate_study(cfg), ConfigError);
    cfg.horizons = {100.0, 400.0, 1600.0};
    cfg.replications = 9;
    CHECK_THROWS_AS(rate_study(cfg), ConfigError);

    // b0 = 0 lies in every model: errors shrink with T
    cfg.replications = 10;
    cfg.level = 2;
    const auto rpt = rate_study(cfg);
    CHECK(rpt.check("median_error_decreasing"));
    CHECK(rpt.table("replications").rows.size() == 30);
    CHECK(rpt.metric("median_error@T=100") < 0.5);
    // pure variance regime: error ~ T^{-1/2}
    CHECK(rpt.metric("slope") == doctest::Approx(-0.5).epsilon(0.3));

    SUBCASE("reports are reproducible and independent of threads")
    {
        StudyConfig c2 = cfg;
        c2.threads = 2;
        const auto again = rate_study(c2);
        CHECK(again.table("replications").rows == rpt.table("replications").rows);
        CHECK(again.metrics == rpt.metrics);
        CHECK(again.summary() == rpt.summary());
    }
    SUBCASE("written to disk")
    {
        const auto dir = std::filesystem::temp_directory_path() / "driftlab_test_rate";
        std::filesystem::remove_all(dir);
        write_report(rpt, dir.string(), "rate_");
        CHECK(std::filesystem::exists(dir / "rate_replications.csv"));
        CHECK(std::filesystem::exists(dir / "rate_horizons.csv"));
        CHECK(std::filesystem::exists(dir / "rate_summary.txt"));
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("BvM check with uniform invariant measure")
{
    StudyConfig cfg = quick_config(drift_preset("zero", 1));
    cfg.level = 3;
    const auto rpt = bvm_check(cfg, {cos_fn(), sin_fn()});
    // mu0 = 1: the target is |phi_J|^2 exactly
    const auto spec = cfg.basis_for(200.0);
    for (const auto& f : {cos_fn(), sin_fn()}) {
        const auto c = project(spec, f.fn);
        CHECK(rpt.metric("target_" + f.name) == doctest::Approx(c.values().squaredNorm()).epsilon(1e-12));
        CHECK(rpt.metric("variance_ratio_" + f.name) > 0.8);
        CHECK(rpt.metric("variance_ratio_" + f.name) < 1.2);
    }
    CHECK_THROWS_AS(bvm_check(cfg, {cos_fn()}, 1), ConfigError);
}

TEST_CASE("invariant-measure CLT check")
{
    StudyConfig cfg = quick_config(drift_preset("zero", 1));
    cfg.K = 16;
    SUBCASE("constant test function gives a zero statistic")
    {
        const auto rpt = invariant_clt_check(cfg, FourierField::constant(1, 16, 1.0), 20);
        CHECK(rpt.check("statistic_identically_zero"));
        CHECK(rpt.metric("target") == 0.0);
        CHECK(rpt.table("green_points").rows.size() == 5);
    }
    SUBCASE("Green-kernel pointwise variance matches a mollified point mass")
    {
        cfg.truth = drift_preset("trig", 1, 0.5);
        const auto g = FourierField::from_function(cos_fn().fn, 16);
        const auto rpt = invariant_clt_check(cfg, g, 20);
        CHECK(rpt.check("green_matches_mollified_within_10pct"));
        CHECK(rpt.metric("target") > 0.0);
    }
}

TEST_CASE("delta-method remainder")
{
    StudyConfig cfg = quick_config(drift_preset("gradient_cos", 1, 0.5));
    const VectorField zero{1, [](const Point&) { return Point{0, 0, 0}; }};
    const auto flat = delta_remainder(cfg, zero, {0.2, 0.1});
    for (const auto& row : flat.table("scales").rows)
        CHECK(row[1] == 0.0);
    CHECK(flat.passed());

    const VectorField h{1, [](const Point& x) { return Point{std::sin(2 * kTwoPi * x[0]) + 0.3, 0, 0}; }};
    const auto rpt = delta_remainder(cfg, h, {0.2, 0.1, 0.05});
    CHECK(rpt.check("remainder_quadratic"));
    CHECK(rpt.check("linearity_within_1e-10"));
    for (const auto& row : rpt.table("ratios").rows) {
        CHECK(row[2] > 3.4);
        CHECK(row[2] < 4.6);
    }
    CHECK_THROWS_AS(delta_remainder(cfg, h, {0.1, 0.2}), ConfigError);
}

TEST_CASE("coverage with the truth inside the model")
{
    // Euler increments make the discrete likelihood exact, so a truth in V_J is
    // covered at the nominal rate up to prior shrinkage.
    const auto spec = build_basis(Family::Daubechies, 2, 1, 6);
    StudyConfig cfg = quick_config(drift_from_coefficients(random_field(spec, 0.7, 11)));
    cfg.level = 2;
    cfg.horizons = {500.0};
    cfg.replications = 100;
    const TestFunction zero{"zero", {1, [](const Point&) { return 0.0; }}};
    const auto rpt = coverage_study(cfg, {cos_fn(), sin_fn(), zero});
    CHECK(rpt.metric("coverage_cos@T=500") >= 0.8);
    CHECK(rpt.metric("coverage_sin@T=500") >= 0.8);
    CHECK(rpt.metric("coverage_zero@T=500") == 1.0);
    CHECK(rpt.metric("band_coverage@T=500") >= 0.8);

    cfg.replications = 49;
    CHECK_THROWS_AS(coverage_study(cfg, {cos_fn()}), ConfigError);
}

TEST_CASE("ergodic CLT study")
{
    StudyConfig cfg = quick_config(drift_preset("zero", 1));
    cfg.horizons = {50.0};
    cfg.replications = 40;
    const auto rpt = ergodic_clt_study(cfg, cos_fn().fn);
    CHECK(rpt.metric("target") == doctest::Approx(1 / (2 * std::numbers::pi * std::numbers::pi)));
    CHECK(std::abs(rpt.metric("integral_g_dmu")) < 1e-15);
    CHECK(rpt.table("replications").rows.size() == 40);
}

TEST_CASE("isometry study")
{
    StudyConfig cfg = quick_config(drift_preset("zero", 1));
    cfg.family = Family::Haar;
    cfg.level = 2;
    cfg.horizons = {100.0, 1000.0};
    cfg.replications = 5;
    const auto rpt = isometry_study(cfg);
    CHECK(rpt.metric("median_gap@T=1000") < rpt.metric("median_gap@T=100"));
    CHECK(rpt.check("median_gap_strictly_decreasing"));
}

TEST_CASE("LAN martingale term has variance |h|^2_{mu0}")
{
    const DriftModel b0 = drift_preset("gradient_cos", 1, 0.5);
    const auto spec = build_basis(Family::Daubechies, 2, 1, 4);
    const CoefficientField hc = random_field(spec, 1.0, 3);
    const FieldEvaluator h(hc);
    const double T = 500.0, delta = 2e-3;

    std::vector<double> W;
    for (std::uint64_t r = 0; r < 200; ++r) {
        const auto path = simulate(b0.field, Point{0, 0, 0}, T, delta, derive_seed(99, r));
        double acc = 0.0;
        for (std::size_t i = 0; i < path.n_steps(); ++i) {
            const Point x = path.position(i);
            const double dx = path.position(i + 1)[0] - x[0];
            acc += h.component(x, 0) * (dx - b0(x)[0] * delta);
        }
        W.push_back(acc / std::sqrt(T));
    }
    const auto mu0 = invariant_measure(b0.field, 32);
    const Eigen::VectorXd s = to_coords(hc, Coords::ScalingLevelJ).values().col(0);
    const double target = s.dot(weighted_gram(spec, mu0.density, 1.0) * s);
    CAPTURE(target);
    CHECK(sample_variance(W) / target > 0.75);
    CHECK(sample_variance(W) / target < 1.25);
}
