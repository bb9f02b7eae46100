#include "doctest.h"

#include "driftlab/elliptic.hpp"
#include "driftlab/error.hpp"
#include "driftlab/green1d.hpp"
#include "driftlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace driftlab;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * kPi;

VectorField zero_drift(int d)
{
    return {d, [](const Point&) { return Point{0, 0, 0}; }};
}

/// b = grad B with B = amp cos(2 pi x_1).
VectorField gradient_drift(int d, double amp)
{
    return {d, [amp](const Point& x) { return Point{-kTwoPi * amp * std::sin(kTwoPi * x[0]), 0, 0}; }};
}

ScalarField potential(int d, double amp)
{
    return {d, [amp](const Point& x) { return amp * std::cos(kTwoPi * x[0]); }};
}

/// A fixed trigonometric drift that is not a gradient.
VectorField trig_drift(int d)
{
    return {d, [d](const Point& x) {
                Point b{0, 0, 0};
                b[0] = 0.6 * std::sin(kTwoPi * x[0]) + 0.3 * std::cos(2 * kTwoPi * x[0]) + 0.2;
                if (d >= 2) {
                    b[0] += 0.25 * std::cos(kTwoPi * x[1]);
                    b[1] = -0.4 * std::cos(kTwoPi * (x[0] + x[1])) + 0.1;
                }
                return b;
            }};
}

FourierField random_trig(int d, int K, int degree, std::uint64_t seed)
{
    Rng rng(seed);
    FourierField f(d, K);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const ModeIndex k = f.mode(i);
        bool inside = true;
        for (int j = 0; j < d; ++j)
            inside = inside && std::abs(k[j]) <= degree;
        if (inside)
            f.coeffs()[i] = cplx(rng.normal(), rng.normal());
    }
    f.symmetrize();
    return f;
}

double rel_sup(const std::vector<double>& a, const std::vector<double>& b)
{
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

std::vector<double> sample_grid(const ScalarField& f, int n)
{
    const int d = f.dim;
    std::size_t total = 1;
    for (int j = 0; j < d; ++j)
        total *= static_cast<std::size_t>(n);
    std::vector<double> out(total);
    for (std::size_t g = 0; g < total; ++g) {
        Point x{0, 0, 0};
        std::size_t rest = g;
        for (int j = d - 1; j >= 0; --j) {
            x[j] = static_cast<double>(rest % static_cast<std::size_t>(n)) / n;
            rest /= static_cast<std::size_t>(n);
        }
        out[g] = f(x);
    }
    return out;
}

} // namespace

TEST_CASE("Fourier fields")
{
    SUBCASE("sampling a cosine")
    {
        const auto f = FourierField::from_function(ScalarField{1, [](const Point& x) { return std::cos(kTwoPi * x[0]); }}, 4);
        CHECK(std::abs(f[ModeIndex{1, 0, 0}] - cplx(0.5, 0)) < 1e-15);
        CHECK(std::abs(f[ModeIndex{-1, 0, 0}] - cplx(0.5, 0)) < 1e-15);
        CHECK(std::abs(f.mean()) < 1e-15);
        CHECK(f.l2_norm() == doctest::Approx(std::sqrt(0.5)));
        CHECK(f.symmetry_error() < 1e-15);
    }
    SUBCASE("grid, tensor and pointwise evaluation agree")
    {
        for (int d = 1; d <= 3; ++d) {
            const auto f = random_trig(d, 3, 3, 10 + d);
            const int n = 5; // coarser than the modes: folding must still be exact
            const auto g = f.grid_values(n);
            std::vector<double> nodes(n);
            for (int i = 0; i < n; ++i)
                nodes[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
            const auto t = f.tensor_values(nodes);
            for (std::size_t i = 0; i < g.size(); i += 7) {
                Point x{0, 0, 0};
                std::size_t rest = i;
                for (int j = d - 1; j >= 0; --j) {
                    x[j] = static_cast<double>(rest % n) / n;
                    rest /= n;
                }
                CHECK(g[i] == doctest::Approx(f.evaluate(x)).epsilon(1e-12));
                CHECK(t[i] == doctest::Approx(f.evaluate(x)).epsilon(1e-12));
            }
        }
    }
    SUBCASE("box indicator coefficients")
    {
        const auto box = FourierField::box_indicator(1, 8, Point{0.25, 0, 0}, Point{0.75, 0, 0});
        CHECK(box.mean() == doctest::Approx(0.5));
        // int_{1/4}^{3/4} e^{-2 pi i x} dx = -1/pi
        CHECK(box[ModeIndex{1, 0, 0}].real() == doctest::Approx(-1 / kPi));
        CHECK(std::abs(box[ModeIndex{1, 0, 0}].imag()) < 1e-15);
        CHECK(box.symmetry_error() < 1e-15);
        const auto box2 = FourierField::box_indicator(2, 3, Point{0.0, 0.5, 0}, Point{0.5, 1.0, 0});
        CHECK(box2.mean() == doctest::Approx(0.25));
        CHECK_THROWS_AS(FourierField::box_indicator(1, 3, Point{0.5, 0, 0}, Point{0.2, 0, 0}), ConfigError);
    }
}

TEST_CASE("apply_generator")
{
    SUBCASE("Laplacian part on a single mode")
    {
        FourierField u(2, 3);
        u[ModeIndex{2, -1, 0}] = 1.0;
        const auto Lu = apply_generator(zero_drift(2), u);
        CHECK(std::abs(Lu[ModeIndex{2, -1, 0}] - cplx(-2 * kPi * kPi * 5, 0)) < 1e-12);
        CHECK(Lu.l2_norm() == doctest::Approx(2 * kPi * kPi * 5));
    }
    SUBCASE("constants are annihilated")
    {
        const auto Lu = apply_generator(trig_drift(2), FourierField::constant(2, 6, 3.0));
        CHECK(Lu.l2_norm() < 1e-13);
    }
    SUBCASE("constant drift on a sine")
    {
        const VectorField one{1, [](const Point&) { return Point{1, 0, 0}; }};
        const auto u = FourierField::from_function(ScalarField{1, [](const Point& x) { return std::sin(kTwoPi * x[0]); }}, 5);
        const auto Lu = apply_generator(one, u);
        for (double x : {0.0, 0.1, 0.37, 0.8}) {
            const double expect = 0.5 * (-4 * kPi * kPi) * std::sin(kTwoPi * x) + kTwoPi * std::cos(kTwoPi * x);
            CHECK(Lu.evaluate(Point{x, 0, 0}) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("pseudospectral products match the Galerkin matrix")
    {
        for (int d : {1, 2}) {
            const int K = d == 1 ? 12 : 6;
            const Generator gen(trig_drift(d), K);
            const auto u = random_trig(d, K, K, 3 + d);
            const Eigen::Map<const Eigen::VectorXcd> uv(u.coeffs().data(), static_cast<Eigen::Index>(u.size()));
            const Eigen::VectorXcd Au = gen.matrix() * uv;
            const Eigen::VectorXcd AHu = gen.matrix(true) * uv;
            const auto Lu = gen.apply(u);
            const auto Lsu = gen.apply_adjoint(u);
            double e1 = 0, e2 = 0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                e1 = std::max(e1, std::abs(Lu.coeffs()[i] - Au(static_cast<Eigen::Index>(i))));
                e2 = std::max(e2, std::abs(Lsu.coeffs()[i] - AHu(static_cast<Eigen::Index>(i))));
            }
            CHECK(e1 < 1e-11 * Au.norm());
            CHECK(e2 < 1e-11 * AHu.norm());
        }
    }
    SUBCASE("adjointness")
    {
        for (int d : {1, 2}) {
            const Generator gen(trig_drift(d), 8);
            const auto u = random_trig(d, 8, 5, 20 + d);
            const auto w = random_trig(d, 8, 5, 30 + d);
            const double lhs = gen.apply(u).inner(w);
            const double rhs = u.inner(gen.apply_adjoint(w));
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(lhs));
        }
    }
    CHECK_THROWS_AS(Generator(trig_drift(1), 8, 2), ConfigError);
}

TEST_CASE("invariant measure")
{
    SUBCASE("zero drift gives Lebesgue measure")
    {
        const auto mu = invariant_measure(zero_drift(2), 8);
        CHECK(mu.density.mean() == 1.0);
        CHECK((mu.density - FourierField::constant(2, 8, 1.0)).l2_norm() < 1e-14);
        CHECK(mu.warnings.empty());
    }
    SUBCASE("gradient drift matches e^{2B}/Z")
    {
        for (int d : {1, 2}) {
            const int K = d == 1 ? 32 : 16;
            const auto mu = invariant_measure(gradient_drift(d, 0.5), K);
            const double Z = gradient_normalizer(potential(d, 0.5));
            const ScalarField oracle{d, [Z](const Point& x) { return std::exp(std::cos(kTwoPi * x[0])) / Z; }};
            const int n = 48;
            CHECK(rel_sup(mu.density.grid_values(n), sample_grid(oracle, n)) < 1e-6);
            CHECK(mu.min_grid_value > 0.0);
            CHECK(mu.density.symmetry_error() < 1e-12);
        }
    }
    SUBCASE("divergence-free perturbation leaves mu unchanged")
    {
        // v = vbar / mu with vbar = (d2 psi, -d1 psi), so div(v mu) = 0
        const double Z = gradient_normalizer(potential(2, 0.5));
        auto mu0 = [Z](const Point& x) { return std::exp(std::cos(kTwoPi * x[0])) / Z; };
        const VectorField b{2, [mu0](const Point& x) {
                                const double s = 0.3 * kTwoPi * std::cos(kTwoPi * (x[0] + 2 * x[1]));
                                const double m = mu0(x);
                                return Point{-kPi * std::sin(kTwoPi * x[0]) + 2 * s / m, -s / m, 0};
                            }};
        const auto mu = invariant_measure(b, 20);
        const int n = 40;
        CHECK(rel_sup(mu.density.grid_values(n), sample_grid(ScalarField{2, mu0}, n)) < 1e-5);
    }
    CHECK_THROWS_AS(invariant_measure(zero_drift(1), 3), ConfigError);
}

TEST_CASE("gradient oracle")
{
    const auto flat = gradient_oracle(ScalarField{1, [](const Point&) { return 0.0; }}, 8);
    CHECK((flat.density - FourierField::constant(1, 8, 1.0)).l2_norm() < 1e-14);

    const auto a = gradient_oracle(potential(1, 0.5), 16);
    const auto b = gradient_oracle(ScalarField{1, [](const Point& x) { return 0.5 * std::cos(kTwoPi * x[0]) + 3.0; }}, 16);
    CHECK((a.density - b.density).l2_norm() < 1e-12);

    // Z = int_0^1 e^{cos(2 pi u)} du = I_0(1), tabulated beforehand by 2^14-node quadrature
    const double Z = 1.2660658777520082;
    CHECK(gradient_normalizer(potential(1, 0.5)) == doctest::Approx(Z).epsilon(1e-14));
    CHECK(a.density.evaluate(Point{0, 0, 0}) == doctest::Approx(std::exp(1.0) / Z).epsilon(1e-12));
}

TEST_CASE("constant-flux solution in one dimension")
{
    SUBCASE("zero drift")
    {
        const auto s = invariant_1d_flux(zero_drift(1), 8);
        CHECK(s.flux == 0.0);
        for (double v : s.grid)
            CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("gradient drift matches the oracle")
    {
        const auto s = invariant_1d_flux(gradient_drift(1, 0.5), 32);
        const double Z = gradient_normalizer(potential(1, 0.5));
        const int n = static_cast<int>(s.grid.size());
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(s.grid[static_cast<std::size_t>(i)] -
                                             std::exp(std::cos(kTwoPi * i / n)) / Z));
        CHECK(worst < 1e-8);
        CHECK(std::abs(s.flux) < 1e-10);
    }
    SUBCASE("constant rotation")
    {
        const VectorField one{1, [](const Point&) { return Point{1, 0, 0}; }};
        const auto s = invariant_1d_flux(one, 16);
        CHECK(s.flux == doctest::Approx(-1.0).epsilon(1e-10));
        const auto mu = invariant_measure(one, 16);
        CHECK(rel_sup(s.measure.density.grid_values(64), mu.density.grid_values(64)) < 1e-6);
    }
    SUBCASE("non-gradient drift agrees with the spectral solver")
    {
        const auto s = invariant_1d_flux(trig_drift(1), 32);
        const auto mu = invariant_measure(trig_drift(1), 32);
        CHECK(rel_sup(s.measure.density.grid_values(128), mu.density.grid_values(128)) < 1e-6);
        CHECK(std::abs(s.flux) > 0.01);
    }
}

TEST_CASE("Poisson solver")
{
    SUBCASE("zero drift, cosine")
    {
        const auto mu = invariant_measure(zero_drift(1), 8);
        const auto f = FourierField::from_function(ScalarField{1, [](const Point& x) { return std::cos(kTwoPi * x[0]); }}, 8);
        const auto u = solve_poisson(zero_drift(1), f, mu);
        CHECK((u + (1.0 / (2 * kPi * kPi)) * f).l2_norm() < 1e-15);
        CHECK(solve_poisson(zero_drift(1), FourierField(1, 8), mu).l2_norm() == 0.0);
    }
    SUBCASE("manufactured trigonometric solutions")
    {
        for (int d : {1, 2}) {
            const int K = d == 1 ? 32 : 16;
            const Generator gen(trig_drift(d), K);
            const auto mu = invariant_measure(gen);
            auto ustar = random_trig(d, K, 5, 40 + d);
            ustar.coeffs()[ustar.zero_index()] = 0.0;
            const auto f = gen.apply(ustar);
            const auto u = solve_poisson(gen, f, mu);
            CHECK((u - ustar).l2_norm() < 1e-8 * ustar.l2_norm());
            CHECK(u.mean() == 0.0);
        }
    }
    SUBCASE("spectral convergence for an analytic solution")
    {
        // u* = Poisson kernel minus 1, coefficients r^{|k|}; f = 1/2 u*'' + b u*' in closed form
        const double r = 0.5;
        const VectorField b = trig_drift(1);
        auto du = [r](double x) {
            const double c = std::cos(kTwoPi * x), s = std::sin(kTwoPi * x);
            const double D = 1 - 2 * r * c + r * r;
            const double d1 = -(1 - r * r) * 2 * r * kTwoPi * s / (D * D);
            const double dD = 2 * r * kTwoPi * s;
            const double d2 = -(1 - r * r) * 2 * r * kTwoPi * kTwoPi * c / (D * D) +
                              2 * (1 - r * r) * 2 * r * kTwoPi * s * dD / (D * D * D);
            return std::make_pair(d1, d2);
        };
        const ScalarField fs{1, [&](const Point& x) {
                                 const auto [d1, d2] = du(x[0]);
                                 return 0.5 * d2 + b(x)[0] * d1;
                             }};
        std::vector<double> err;
        for (int K : {16, 32}) {
            const Generator gen(b, K);
            const auto mu = invariant_measure(gen);
            const auto f = center(FourierField::from_function(fs, K, 8), mu);
            const auto u = solve_poisson(gen, f, mu);
            // exact solution restricted to |k| <= K plus its tail
            FourierField ex(1, K);
            for (int k = 1; k <= K; ++k) {
                ex[ModeIndex{k, 0, 0}] = std::pow(r, k);
                ex[ModeIndex{-k, 0, 0}] = std::pow(r, k);
            }
            const double tail2 = 2 * std::pow(r, 2 * (K + 1)) / (1 - r * r);
            const double norm = std::sqrt(2 * r * r / (1 - r * r));
            err.push_back(std::sqrt(std::pow((u - ex).l2_norm(), 2) + tail2) / norm);
        }
        CAPTURE(err[0]);
        CAPTURE(err[1]);
        CHECK(err[1] < 1e-8);
        CHECK(err[1] / err[0] < 1e-3);
    }
    SUBCASE("solvability is enforced")
    {
        const auto mu = invariant_measure(trig_drift(1), 8);
        const auto f = FourierField::constant(1, 8, 1.0);
        CHECK_THROWS_AS(solve_poisson(trig_drift(1), f, mu), PreconditionError);
        CHECK(solve_poisson(trig_drift(1), center(f, mu), mu).l2_norm() < 1e-14);
    }
    SUBCASE("H2 norm of the solution is comparable to the data norm")
    {
        const Generator gen(trig_drift(1), 16);
        const auto mu = invariant_measure(gen);
        std::vector<double> ratio;
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto f = center(random_trig(1, 16, 1 + static_cast<int>(s % 10), 100 + s), mu);
            const auto u = solve_poisson(gen, f, mu);
            double h2 = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double k = u.mode(i)[0];
                h2 += std::pow(1 + k * k, 2) * std::norm(u.coeffs()[i]);
            }
            ratio.push_back(std::sqrt(h2) / f.l2_norm());
        }
        CHECK(*std::max_element(ratio.begin(), ratio.end()) / *std::min_element(ratio.begin(), ratio.end()) < 50);
    }
}

TEST_CASE("adjoint solver")
{
    const auto f = FourierField::from_function(ScalarField{1, [](const Point& x) { return std::cos(kTwoPi * x[0]); }}, 8);
    CHECK((solve_adjoint(zero_drift(1), f) + (1.0 / (2 * kPi * kPi)) * f).l2_norm() < 1e-15);
    CHECK(solve_adjoint(trig_drift(1), FourierField(1, 8)).l2_norm() == 0.0);
    const Generator gen(trig_drift(2), 10);
    auto g = random_trig(2, 10, 4, 77);
    g.coeffs()[g.zero_index()] = 0.0;
    const auto u = solve_adjoint(gen, g);
    CHECK((gen.apply_adjoint(u) - g).l2_norm() < 1e-10 * g.l2_norm());
    CHECK(std::abs(u.mean()) == 0.0);
    CHECK_THROWS_AS(solve_adjoint(gen, FourierField::constant(2, 10, 1.0)), PreconditionError);
}

TEST_CASE("linearised invariant measure")
{
    SUBCASE("zero direction")
    {
        const Generator gen(trig_drift(1), 16);
        const auto mu = invariant_measure(gen);
        CHECK(linearize_invariant(gen, zero_drift(1), mu).l2_norm() == 0.0);
    }
    SUBCASE("zero drift, gradient direction")
    {
        const Generator gen(zero_drift(1), 16);
        const auto mu = invariant_measure(gen);
        const auto v = linearize_invariant(gen, gradient_drift(1, 0.3), mu);
        // v = -2 (B - int B) with B = 0.3 cos
        FourierField expect = FourierField::from_function(potential(1, 0.3), 16);
        expect *= -2.0;
        CHECK((v - expect).l2_norm() < 1e-13);
    }
    SUBCASE("linearity and quadratic remainder")
    {
        const VectorField b0 = gradient_drift(1, 0.5);
        const VectorField h{1, [](const Point& x) { return Point{std::cos(kTwoPi * x[0]) + 0.5, 0, 0}; }};
        const int K = 32;
        const Generator gen(b0, K);
        const auto mu0 = invariant_measure(gen);
        const auto v1 = linearize_invariant(gen, h, mu0);
        std::vector<double> rem;
        for (double c : {0.2, 0.1, 0.05}) {
            const VectorField hc{1, [&h, c](const Point& x) { return Point{c * h(x)[0], 0, 0}; }};
            const auto vc = linearize_invariant(gen, hc, mu0);
            CHECK((vc - c * v1).l2_norm() <= 1e-10 * vc.l2_norm());
            const VectorField bc{1, [&b0, &h, c](const Point& x) { return Point{b0(x)[0] + c * h(x)[0], 0, 0}; }};
            const auto muc = invariant_measure(bc, K);
            rem.push_back((muc.density - mu0.density + vc).l2_norm());
        }
        for (std::size_t i = 0; i + 1 < rem.size(); ++i) {
            const double ratio = rem[i] / rem[i + 1];
            CHECK(ratio > 3.4);
            CHECK(ratio < 4.6);
        }
    }
}

TEST_CASE("asymptotic variance")
{
    const Generator flat(zero_drift(1), 16);
    const auto mu = invariant_measure(flat);
    CHECK(clt_variance(flat, FourierField::constant(1, 16, 2.0), mu) == 0.0);
    const auto g = FourierField::from_function(ScalarField{1, [](const Point& x) { return std::cos(kTwoPi * x[0]); }}, 16);
    CHECK(clt_variance(flat, g, mu) == doctest::Approx(1 / (2 * kPi * kPi)).epsilon(1e-13));
}

TEST_CASE("weighted Gram")
{
    const auto spec = build_basis(Family::Daubechies, 3, 1, 4);
    const auto one = weighted_gram(spec, ScalarField{1, [](const Point&) { return 1.0; }});
    CHECK((one - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-6);
    const auto three = weighted_gram(spec, ScalarField{1, [](const Point&) { return 3.0; }});
    CHECK((three - 3 * one).cwiseAbs().maxCoeff() < 1e-13);

    for (int J : {1, 2}) {
        const auto haar = build_basis(Family::Haar, J, 1);
        const auto G = weighted_gram(haar, ScalarField{1, [](const Point& x) { return 1 + 0.5 * std::cos(kTwoPi * x[0]); }});
        const int M = 1 << J;
        for (int r = 0; r < M; ++r)
            for (int s = 0; s < M; ++s) {
                // 2^J int_{r/M}^{(r+1)/M} (1 + cos(2 pi x)/2) dx on the diagonal, 0 elsewhere
                const double exact =
                    r != s ? 0.0
                           : 1.0 + M * 0.5 * (std::sin(kTwoPi * (r + 1) / M) - std::sin(kTwoPi * r / M)) / kTwoPi;
                CHECK(std::abs(G(r, s) - exact) < 1e-10);
            }
    }

    // Fourier weight and its reciprocal
    const auto mu = gradient_oracle(potential(1, 0.5), 24);
    const auto Gmu = weighted_gram(spec, mu.density, 1.0);
    const auto Gfn = weighted_gram(spec, ScalarField{1, [&mu](const Point& x) { return mu.density.evaluate(x); }});
    CHECK((Gmu - Gfn).cwiseAbs().maxCoeff() < 1e-12);
    const auto Ginv = weighted_gram(spec, mu.density, -1.0);
    CHECK(Ginv(0, 0) > 0.0);
}

TEST_CASE("Green kernel")
{
    const VectorField b = trig_drift(1);
    const GreenKernel1d G(b);
    SUBCASE("reproducing property against the Poisson solver")
    {
        const int K = 32;
        const Generator gen(b, K);
        const auto mu = invariant_measure(gen);
        const auto g = FourierField::from_function(ScalarField{1, [](const Point& x) { return std::cos(kTwoPi * x[0]); }}, K);
        const auto u = solve_poisson(gen, center(g, mu), mu);
        for (double x : {0.05, 0.23, 0.5, 0.71, 0.93}) {
            const auto row = G.kernel_row(x);
            double acc = 0.0;
            for (int i = 0; i < row.size(); ++i)
                acc += row.values[static_cast<std::size_t>(i)] * std::cos(kTwoPi * i / row.size());
            acc /= row.size();
            const double ux = u.evaluate(Point{x, 0, 0});
            CHECK(std::abs(acc - ux) < 1e-6 * std::abs(ux));
            CHECK(std::abs(row.integral()) < 1e-9);
        }
    }
    SUBCASE("invariant density agrees with the spectral solution")
    {
        const auto mu = invariant_measure(b, 32);
        for (double x : {0.1, 0.4, 0.77})
            CHECK(G.density(x) == doctest::Approx(mu(Point{x, 0, 0})).epsilon(1e-8));
    }
    SUBCASE("translation invariance without drift")
    {
        const GreenKernel1d G0(zero_drift(1), 1 << 12);
        for (double x : {0.1, 0.6})
            for (double y : {0.0, 0.3, 0.85}) {
                const double base = G0.kernel(0.0, wrap_unit(y - x));
                CHECK(G0.kernel(x, y) == doctest::Approx(base).epsilon(1e-9));
                CHECK(G0.kernel(y, x) == doctest::Approx(base).epsilon(1e-9));
            }
        // closed form: -(t^2 - |t| + 1/6) is the zero-mean kernel of 1/2 d^2
        for (double t : {0.0, 0.2, 0.5})
            CHECK(G0.kernel(t, 0.0) == doctest::Approx(-(t * t - t + 1.0 / 6.0)).epsilon(1e-9));
    }
    SUBCASE("response derivative matches finite differences")
    {
        const double x = 0.3;
        for (double y : {0.1, 0.55, 0.9}) {
            const double h = 1e-5;
            const double fd = (G.response(y + h, x) - G.response(y - h, x)) / (2 * h);
            CHECK(G.response_derivative(y, x) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}
