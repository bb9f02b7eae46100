#include "doctest.h"

#include "driftlab/basis.hpp"
#include "driftlab/error.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/wavelet_filters.hpp"

#include <cmath>
#include <numbers>

using namespace driftlab;

namespace {

// Independent evaluation of a periodised level-J scaling function from the mother
// function: 2^{J/2} sum_n phi(2^J (x + n) - r).
double periodised(const BasisSpec& spec, int r, double x)
{
    const double M = spec.per_axis();
    double acc = 0.0;
    for (int n = -30; n <= 30; ++n)
        acc += spec.scaling_function(M * (x + n) - r);
    return std::sqrt(M) * acc;
}

CoefficientField random_field(const BasisSpec& spec, Coords coords, int comps, std::uint64_t seed)
{
    Rng rng(seed);
    CoefficientField c(spec, coords, comps);
    for (Eigen::Index i = 0; i < c.values().size(); ++i)
        c.values().data()[i] = rng.normal();
    return c;
}

} // namespace

TEST_CASE("Daubechies filters")
{
    SUBCASE("S=2 matches the classical four-tap filter")
    {
        const auto h = daubechies_lowpass(2);
        REQUIRE(h.size() == 4);
        const double s3 = std::sqrt(3.0);
        const double den = 4.0 * std::sqrt(2.0);
        CHECK(h[0] == doctest::Approx((1 + s3) / den).epsilon(1e-13));
        CHECK(h[1] == doctest::Approx((3 + s3) / den).epsilon(1e-13));
        CHECK(h[2] == doctest::Approx((3 - s3) / den).epsilon(1e-13));
        CHECK(h[3] == doctest::Approx((1 - s3) / den).epsilon(1e-13));
    }
    for (int S = 1; S <= 10; ++S) {
        CAPTURE(S);
        const auto h = daubechies_lowpass(S);
        REQUIRE(h.size() == static_cast<std::size_t>(2 * S));
        double sum = 0.0;
        for (double v : h)
            sum += v;
        CHECK(sum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        for (int shift = 0; shift < S; ++shift) {
            double acc = 0.0;
            for (int k = 0; k + 2 * shift < 2 * S; ++k)
                acc += h[k] * h[k + 2 * shift];
            CHECK(acc == doctest::Approx(shift == 0 ? 1.0 : 0.0).epsilon(1e-11));
        }
        // vanishing moments of the high-pass filter
        for (int p = 0; p < S; ++p) {
            double acc = 0.0;
            for (int k = 0; k < 2 * S; ++k)
                acc += (k % 2 == 0 ? 1.0 : -1.0) * std::pow(k, p) * h[k];
            CHECK(std::abs(acc) < 1e-8 * std::pow(2.0 * S, p));
        }
    }
    CHECK_THROWS_AS(daubechies_lowpass(0), ConfigError);
    CHECK_THROWS_AS(daubechies_lowpass(11), ConfigError);
}

TEST_CASE("cascade scaling function is a partition of unity")
{
    const auto h = daubechies_lowpass(3);
    const int depth = 8;
    const auto phi = cascade_scaling_function(h, depth);
    const std::size_t step = std::size_t{1} << depth;
    for (std::size_t off = 0; off < step; off += 17) {
        double acc = 0.0;
        for (std::size_t i = off; i < phi.size(); i += step)
            acc += phi[i];
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("build_basis dimensions and errors")
{
    CHECK(build_basis(Family::Haar, 2, 1).size() == 4);
    CHECK(build_basis(Family::Haar, 1, 2).size() == 4);
    CHECK(build_basis(Family::Daubechies, 3, 1, 3).size() == 8);
    CHECK(build_basis(Family::Haar, 0, 3).size() == 1);
    CHECK_THROWS_AS(build_basis(Family::Haar, 2, 4), ConfigError);
    CHECK_THROWS_AS(build_basis(Family::Haar, 2, 0), ConfigError);
    CHECK_THROWS_AS(build_basis(Family::Daubechies, 2, 1, 1), ConfigError);
    CHECK_THROWS_AS(build_basis(Family::Haar, -1, 1), ConfigError);
}

TEST_CASE("orthonormality by quadrature")
{
    SUBCASE("Daubechies S=3, J=3: independent dyadic-grid Gram")
    {
        const auto spec = build_basis(Family::Daubechies, 3, 1, 3);
        const int n = 1 << (spec.level() + spec.cascade_depth());
        const int M = spec.per_axis();
        Eigen::MatrixXd vals(M, n);
        for (int r = 0; r < M; ++r)
            for (int i = 0; i < n; ++i)
                vals(r, i) = periodised(spec, r, static_cast<double>(i) / n);
        const Eigen::MatrixXd gram = vals * vals.transpose() / n;
        CHECK((gram - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff() < 1e-6);
        // the library's own quadrature agrees with the independent one
        const auto q = axis_quadrature(spec, spec.cascade_depth());
        const Eigen::MatrixXd lib = quadrature_gram(spec, q, {});
        CHECK((lib - gram).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("Haar is exact")
    {
        for (int d = 1; d <= 3; ++d) {
            const auto spec = build_basis(Family::Haar, d == 3 ? 1 : 2, d);
            const auto q = axis_quadrature(spec, 1);
            const Eigen::MatrixXd gram = quadrature_gram(spec, q, {});
            const auto n = static_cast<Eigen::Index>(spec.size());
            CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("Daubechies in two dimensions at the default depth")
    {
        const auto spec = build_basis(Family::Daubechies, 2, 2, 4);
        const auto q = axis_quadrature(spec, -1);
        const Eigen::MatrixXd gram = quadrature_gram(spec, q, {});
        const auto n = static_cast<Eigen::Index>(spec.size());
        CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("basis functions are 1-periodic")
{
    const auto spec = build_basis(Family::Daubechies, 2, 1, 4);
    for (int r = 0; r < spec.per_axis(); ++r)
        for (double x : {0.013, 0.25, 0.61, 0.999})
            CHECK(spec.scaling(r, x) == doctest::Approx(spec.scaling(r, x + 3.0)).epsilon(1e-12));
    // and agree with the explicit periodisation
    for (int r = 0; r < spec.per_axis(); ++r)
        for (double x : {0.0, 0.125, 0.3, 0.77})
            CHECK(spec.scaling(r, x) == doctest::Approx(periodised(spec, r, x)).epsilon(1e-12));
}

TEST_CASE("synthesize")
{
    SUBCASE("father coefficient gives the constant function")
    {
        for (auto spec : {build_basis(Family::Haar, 3, 1), build_basis(Family::Daubechies, 3, 1, 5),
                          build_basis(Family::Daubechies, 2, 2, 3)}) {
            CoefficientField c(spec, Coords::Multiresolution, 1);
            c.values()(0, 0) = 1.0;
            for (double x : {0.0, 0.1, 0.4999, 0.73}) {
                const Point p{x, 1.0 - x, 0.0};
                CHECK(synthesize(c, p)[0] == doctest::Approx(1.0).epsilon(1e-10));
            }
        }
    }
    SUBCASE("zero field")
    {
        const auto spec = build_basis(Family::Daubechies, 2, 1, 3);
        CoefficientField c(spec, Coords::Multiresolution, 1);
        CHECK(synthesize(c, Point{0.3, 0, 0})[0] == 0.0);
    }
    SUBCASE("Haar box value")
    {
        const auto spec = build_basis(Family::Haar, 1, 1);
        CoefficientField c(spec, Coords::ScalingLevelJ, 1);
        c.values()(0, 0) = 1.0;
        CHECK(synthesize(c, Point{0.25, 0, 0})[0] == doctest::Approx(std::sqrt(2.0)));
        CHECK(synthesize(c, Point{0.75, 0, 0})[0] == 0.0);
        // reduced mod 1 before lookup
        CHECK(synthesize(c, Point{-0.75, 0, 0})[0] == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("coordinate-count mismatch")
    {
        const auto spec = build_basis(Family::Haar, 1, 2);
        CoefficientField c(spec, Coords::ScalingLevelJ, 2);
        CHECK_THROWS_AS(synthesize(c, Point{0.1, 0.2, 0.0}, 1), ShapeError);
    }
}

TEST_CASE("transform")
{
    SUBCASE("Haar butterfly")
    {
        const auto spec = build_basis(Family::Haar, 1, 1);
        Eigen::MatrixXd v(2, 1);
        v << std::sqrt(2.0), 0.0;
        const auto mr = transform(CoefficientField(spec, Coords::ScalingLevelJ, v), Direction::ToMultiresolution);
        CHECK(mr.values()(0, 0) == doctest::Approx(1.0));
        CHECK(mr.values()(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("roundtrip and norm preservation")
    {
        std::uint64_t seed = 1;
        for (auto spec : {build_basis(Family::Haar, 4, 1), build_basis(Family::Daubechies, 5, 1, 6),
                          build_basis(Family::Daubechies, 1, 1, 4), build_basis(Family::Haar, 3, 2),
                          build_basis(Family::Daubechies, 3, 2, 3), build_basis(Family::Daubechies, 2, 3, 2)}) {
            CAPTURE(spec.describe());
            const auto c = random_field(spec, Coords::ScalingLevelJ, spec.dim(), seed++);
            const auto mr = transform(c, Direction::ToMultiresolution);
            const auto back = transform(mr, Direction::ToScaling);
            CHECK((back.values() - c.values()).norm() <= 1e-12 * c.values().norm());
            CHECK(mr.values().norm() == doctest::Approx(c.values().norm()).epsilon(1e-12));
        }
    }
    SUBCASE("zero stays zero; wrong source coordinates rejected")
    {
        const auto spec = build_basis(Family::Daubechies, 3, 1, 3);
        CoefficientField z(spec, Coords::ScalingLevelJ, 1);
        CHECK(transform(z, Direction::ToMultiresolution).values().norm() == 0.0);
        CHECK_THROWS_AS(transform(z, Direction::ToScaling), ShapeError);
    }
    SUBCASE("multiresolution level layout")
    {
        const auto spec = build_basis(Family::Haar, 3, 1);
        CHECK(coefficient_level(spec, 0) == -1);
        CHECK(coefficient_level(spec, 1) == 0);
        CHECK(coefficient_level(spec, 2) == 1);
        CHECK(coefficient_level(spec, 3) == 1);
        CHECK(coefficient_level(spec, 7) == 2);
        const auto spec2 = build_basis(Family::Haar, 2, 2);
        int count[3] = {0, 0, 0};
        for (std::size_t i = 1; i < spec2.size(); ++i)
            ++count[coefficient_level(spec2, i)];
        CHECK(count[0] == 3);
        CHECK(count[1] == 12);
    }
}

TEST_CASE("Parseval against fine-grid quadrature")
{
    SUBCASE("Haar, exact")
    {
        const auto spec = build_basis(Family::Haar, 3, 1);
        const auto c = random_field(spec, Coords::Multiresolution, 1, 11);
        FieldEvaluator f(c);
        const int n = 4096;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = f(Point{(i + 0.5) / n, 0, 0})[0];
            acc += v * v / n;
        }
        CHECK(acc == doctest::Approx(c.values().squaredNorm()).epsilon(1e-12));
    }
    SUBCASE("Daubechies")
    {
        const auto spec = build_basis(Family::Daubechies, 3, 1, 4);
        const auto c = random_field(spec, Coords::Multiresolution, 1, 12);
        FieldEvaluator f(c);
        const int n = 1 << (spec.level() + spec.cascade_depth());
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = f(Point{static_cast<double>(i) / n, 0, 0})[0];
            acc += v * v / n;
        }
        CHECK(acc == doctest::Approx(c.values().squaredNorm()).epsilon(1e-6));
    }
}

TEST_CASE("projection")
{
    SUBCASE("projection reproduces a field already in V_J")
    {
        const auto spec = build_basis(Family::Daubechies, 3, 1, 3);
        const auto c = random_field(spec, Coords::Multiresolution, 1, 5);
        FieldEvaluator f(c);
        const auto p = project(spec, f.as_scalar_field(0));
        CHECK((p.values() - c.values()).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("Haar projection of a smooth function equals exact box averages")
    {
        const auto spec = build_basis(Family::Haar, 2, 1);
        const ScalarField g{1, [](const Point& x) { return std::cos(2 * std::numbers::pi * x[0]); }};
        const auto p = project(spec, g, Coords::ScalingLevelJ);
        for (int r = 0; r < 4; ++r) {
            // int_{r/4}^{(r+1)/4} cos(2 pi x) dx * 2
            const double exact =
                2.0 * (std::sin(2 * std::numbers::pi * (r + 1) / 4.0) - std::sin(2 * std::numbers::pi * r / 4.0)) /
                (2 * std::numbers::pi);
            CHECK(p.values()(r, 0) == doctest::Approx(exact).epsilon(1e-12));
        }
    }
    SUBCASE("coefficient decay of cos(2 pi x)")
    {
        for (int S : {2, 3, 4}) {
            CAPTURE(S);
            const auto spec = build_basis(Family::Daubechies, 7, 1, S, 14);
            const ScalarField g{1, [](const Point& x) { return std::cos(2 * std::numbers::pi * x[0]); }};
            const auto p = project(spec, g, Coords::Multiresolution, 14);
            // least-squares slope of log2 max |d_l| against l, levels 2..6
            std::vector<double> ls, ys;
            for (int l = 2; l <= 6; ++l) {
                double mx = 0.0;
                for (std::size_t i = std::size_t{1} << l; i < (std::size_t{2} << l); ++i)
                    mx = std::max(mx, std::abs(p.values()(static_cast<Eigen::Index>(i), 0)));
                ls.push_back(l);
                ys.push_back(std::log2(mx));
            }
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < ls.size(); ++i) {
                mx += ls[i] / ls.size();
                my += ys[i] / ys.size();
            }
            double sxy = 0, sxx = 0;
            for (std::size_t i = 0; i < ls.size(); ++i) {
                sxy += (ls[i] - mx) * (ys[i] - my);
                sxx += (ls[i] - mx) * (ls[i] - mx);
            }
            const double slope = sxy / sxx;
            CHECK(slope <= -(S + 0.5) + 0.5);
        }
    }
}

TEST_CASE("prior weights and norms")
{
    PriorSpec p1{1.0, 2.0, 3, 1};
    CHECK(prior_sigma(p1, 3) == doctest::Approx(0.0441942).epsilon(1e-6));
    PriorSpec p2{0.0, 1.0, 2, 2};
    CHECK(prior_sigma(p2, 0) == 1.0);
    CHECK(prior_sigma(p2, -1) == 1.0);
    PriorSpec p3{0.5, 1.0, 2, 2};
    CHECK(prior_sigma(p3, 2) == doctest::Approx(0.125));
    PriorSpec bad{-0.5, 1.0, 2, 1};
    CHECK_THROWS_AS(prior_sigma(bad, 1), ConfigError);
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // J from the horizon rule
    CHECK(PriorSpec::from_horizon(1.0, 2.0, 250, 1).level == 2);
    CHECK(PriorSpec::from_horizon(1.0, 2.0, 16000, 1).level == 3);

    const auto spec = build_basis(Family::Haar, 3, 1);
    PriorSpec prior{1.0, 2.0, 3, 1};
    SUBCASE("rkhs single term")
    {
        CoefficientField c(spec, Coords::Multiresolution, 1);
        c.values()(5, 0) = 1.0; // level 2
        const double s = prior_sigma(prior, 2);
        CHECK(rkhs_inner(c, c, prior) == doctest::Approx(1.0 / (s * s)));
    }
    SUBCASE("rkhs disjoint supports")
    {
        CoefficientField a(spec, Coords::Multiresolution, 1), b(spec, Coords::Multiresolution, 1);
        a.values()(1, 0) = 2.0;
        b.values()(6, 0) = 3.0;
        CHECK(rkhs_inner(a, b, prior) == 0.0);
    }
    SUBCASE("rkhs with unit weights is the squared Euclidean norm")
    {
        PriorSpec flat{0.0, 1.0, 3, 1};
        const auto spec0 = build_basis(Family::Haar, 0, 1);
        PriorSpec flat0{0.0, 1.0, 0, 1};
        const auto c = random_field(spec0, Coords::Multiresolution, 1, 3);
        CHECK(rkhs_inner(c, c, flat0) == doctest::Approx(c.values().squaredNorm()));
        (void)flat;
    }
    SUBCASE("rkhs rejects scaling coordinates")
    {
        CoefficientField c(spec, Coords::ScalingLevelJ, 1);
        CHECK_THROWS_AS(rkhs_inner(c, c, prior), ShapeError);
    }
    SUBCASE("Sobolev norms")
    {
        CoefficientField c(spec, Coords::Multiresolution, 1);
        c.values()(4, 0) = 1.0; // level 2
        CHECK(sobolev_norm(c, 1.5) == doctest::Approx(std::exp2(3.0)));
        CoefficientField two(spec, Coords::Multiresolution, 1);
        two.values()(2, 0) = 1.0; // level 1
        two.values()(4, 0) = 1.0; // level 2
        CHECK(sobolev_norm(two, 1.0) == doctest::Approx(std::sqrt(20.0)));
        const auto r = random_field(spec, Coords::Multiresolution, 1, 9);
        CHECK(sobolev_norm(r, 0.0) == doctest::Approx(r.values().norm()));
    }
}
