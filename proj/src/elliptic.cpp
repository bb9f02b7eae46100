#include "driftlab/elliptic.hpp"

#include "detail/periodic1d.hpp"
#include "driftlab/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace driftlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t ipow(std::size_t b, int e)
{
    std::size_t r = 1;
    for (int i = 0; i < e; ++i)
        r *= b;
    return r;
}

Point grid_point(std::size_t g, int d, int n)
{
    Point x{0, 0, 0};
    for (int j = d - 1; j >= 0; --j) {
        x[j] = static_cast<double>(g % static_cast<std::size_t>(n)) / n;
        g /= static_cast<std::size_t>(n);
    }
    return x;
}

std::string sci(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

Eigen::VectorXcd to_vector(const FourierField& f)
{
    return Eigen::Map<const Eigen::VectorXcd>(f.coeffs().data(), static_cast<Eigen::Index>(f.size()));
}

} // namespace

Generator::Generator(const VectorField& b, int K, int oversample) : dim_(b.dim), K_(K)
{
    if (dim_ < 1 || dim_ > kMaxDim)
        throw ConfigError("drift dimension must be 1..3");
    if (K < 1)
        throw ConfigError("Fourier truncation K must be at least 1");
    if (oversample < 3)
        throw ConfigError("oversample must be at least 3 so that products are alias-free");
    N_ = 2 * oversample * K;
    const std::size_t total = ipow(static_cast<std::size_t>(N_), dim_);
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(dim_), std::vector<double>(total));
    for (std::size_t g = 0; g < total; ++g) {
        const Point v = b(grid_point(g, dim_, N_));
        for (int j = 0; j < dim_; ++j) {
            if (!std::isfinite(v[j]))
                throw NumericalError("drift is not finite on the collocation grid");
            samples[static_cast<std::size_t>(j)][g] = v[j];
        }
    }
    for (int j = 0; j < dim_; ++j) {
        bhat_.push_back(FourierField::from_grid(dim_, N_, samples[static_cast<std::size_t>(j)], 2 * K));
        bgrid_.push_back(bhat_.back().grid_values(N_));
    }
}

Eigen::MatrixXcd Generator::matrix(bool adjoint) const
{
    const FourierField shape(dim_, K_);
    const auto n = static_cast<Eigen::Index>(shape.size());
    Eigen::MatrixXcd A(n, n);
    std::vector<ModeIndex> modes(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        modes[static_cast<std::size_t>(i)] = shape.mode(static_cast<std::size_t>(i));
    const FourierField& b0 = bhat_[0];
    for (Eigen::Index c = 0; c < n; ++c) {
        const ModeIndex& m = modes[static_cast<std::size_t>(c)];
        for (Eigen::Index r = 0; r < n; ++r) {
            const ModeIndex& k = modes[static_cast<std::size_t>(r)];
            ModeIndex q{0, 0, 0};
            for (int j = 0; j < dim_; ++j)
                q[j] = k[j] - m[j];
            const std::size_t qi = b0.index(q);
            cplx v = 0.0;
            // A: sum_j bhat_j(k-m) 2 pi i m_j;  A^H: -sum_j bhat_j(k-m) 2 pi i k_j
            for (int j = 0; j < dim_; ++j) {
                const double w = adjoint ? -static_cast<double>(k[j]) : static_cast<double>(m[j]);
                v += bhat_[static_cast<std::size_t>(j)].coeffs()[qi] * cplx(0.0, kTwoPi * w);
            }
            if (r == c) {
                double k2 = 0.0;
                for (int j = 0; j < dim_; ++j)
                    k2 += static_cast<double>(k[j]) * k[j];
                v += -0.5 * kTwoPi * kTwoPi * k2;
            }
            A(r, c) = v;
        }
    }
    return A;
}

Eigen::MatrixXcd Generator::reduced_matrix(bool adjoint) const
{
    Eigen::MatrixXcd A = matrix(adjoint);
    const FourierField shape(dim_, K_);
    const auto z = static_cast<Eigen::Index>(shape.zero_index());
    const auto n = A.rows();
    // drop row and column z by shifting the trailing blocks up/left
    A.block(z, 0, n - z - 1, n) = A.block(z + 1, 0, n - z - 1, n).eval();
    A.block(0, z, n, n - z - 1) = A.block(0, z + 1, n, n - z - 1).eval();
    A.conservativeResize(n - 1, n - 1);
    return A;
}

FourierField Generator::apply(const FourierField& u) const
{
    if (u.dim() != dim_ || u.K() != K_)
        throw ShapeError("field does not match the generator truncation");
    const std::size_t total = ipow(static_cast<std::size_t>(N_), dim_);
    std::vector<double> acc(total, 0.0);
    for (int j = 0; j < dim_; ++j) {
        const auto du = u.derivative(j).grid_values(N_);
        const auto& bj = bgrid_[static_cast<std::size_t>(j)];
        for (std::size_t g = 0; g < total; ++g)
            acc[g] += bj[g] * du[g];
    }
    FourierField out = FourierField::from_grid(dim_, N_, acc, K_);
    FourierField lap = u.laplacian();
    lap *= 0.5;
    out += lap;
    return out;
}

FourierField Generator::apply_adjoint(const FourierField& u) const
{
    if (u.dim() != dim_ || u.K() != K_)
        throw ShapeError("field does not match the generator truncation");
    const std::size_t total = ipow(static_cast<std::size_t>(N_), dim_);
    const auto ug = u.grid_values(N_);
    FourierField out = u.laplacian();
    out *= 0.5;
    std::vector<double> prod(total);
    for (int j = 0; j < dim_; ++j) {
        const auto& bj = bgrid_[static_cast<std::size_t>(j)];
        for (std::size_t g = 0; g < total; ++g)
            prod[g] = bj[g] * ug[g];
        out -= FourierField::from_grid(dim_, N_, prod, K_).derivative(j);
    }
    return out;
}

FourierField apply_generator(const VectorField& b, const FourierField& u, int oversample)
{
    if (u.K() == 0)
        return FourierField(u.dim(), 0);
    return Generator(b, u.K(), oversample).apply(u);
}

FourierField apply_adjoint_generator(const VectorField& b, const FourierField& u, int oversample)
{
    if (u.K() == 0)
        return FourierField(u.dim(), 0);
    return Generator(b, u.K(), oversample).apply_adjoint(u);
}

InvariantMeasure invariant_measure(const Generator& gen)
{
    if (gen.K() < 4)
        throw ConfigError("invariant measure needs K >= 4");
    Eigen::MatrixXcd M = gen.matrix(true);
    FourierField out(gen.dim(), gen.K());
    const auto z = static_cast<Eigen::Index>(out.zero_index());
    // row z of A^H vanishes identically (int L* u = 0); it carries the normalisation instead
    M.row(z).setZero();
    M(z, z) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
        throw NumericalError("invariant-measure system is numerically singular (rcond " + sci(rcond) +
                             "); increase K");
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(M.rows());
    rhs(z) = 1.0;
    const Eigen::VectorXcd c = lu.solve(rhs);
    std::copy(c.data(), c.data() + c.size(), out.coeffs().begin());
    out.symmetrize();
    out.coeffs()[out.zero_index()] = 1.0;

    InvariantMeasure mu(std::move(out));
    mu.rcond = rcond;
    const auto grid = mu.density.grid_values(gen.grid_points());
    mu.min_grid_value = *std::min_element(grid.begin(), grid.end());
    if (!(mu.min_grid_value > 0.0))
        mu.warnings.push_back("invariant density is not positive on the grid (min " + sci(mu.min_grid_value) +
                              "); resolution too low, increase K");
    return mu;
}

InvariantMeasure invariant_measure(const VectorField& b, int K, int oversample)
{
    return invariant_measure(Generator(b, K, oversample));
}

FourierField center(const FourierField& f, const InvariantMeasure& mu)
{
    FourierField out(f);
    const double s = f.inner(mu.density) / mu.density.mean();
    out.coeffs()[out.zero_index()] -= s;
    return out;
}

namespace {

FourierField solve_reduced(const Generator& gen, const Eigen::MatrixXcd& M, const FourierField& f,
                           const char* what)
{
    const auto z = static_cast<Eigen::Index>(f.zero_index());
    const auto n = static_cast<Eigen::Index>(f.size());
    Eigen::VectorXcd rhs(n - 1);
    const Eigen::VectorXcd fv = to_vector(f);
    rhs.head(z) = fv.head(z);
    rhs.tail(n - z - 1) = fv.tail(n - z - 1);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14))
        throw NumericalError(std::string(what) + ": linear system is numerically singular (rcond " + sci(rcond) +
                             ")");
    const Eigen::VectorXcd x = lu.solve(rhs);
    FourierField u(gen.dim(), gen.K());
    auto uc = u.coeffs();
    std::copy(x.data(), x.data() + z, uc.begin());
    std::copy(x.data() + z, x.data() + x.size(), uc.begin() + z + 1);
    u.symmetrize();
    u.coeffs()[u.zero_index()] = 0.0;
    return u;
}

} // namespace

FourierField solve_poisson(const Generator& gen, const FourierField& f, const InvariantMeasure& mu,
                           const SolverOptions& opts)
{
    if (f.dim() != gen.dim() || f.K() != gen.K())
        throw ShapeError("right-hand side does not match the generator truncation");
    const double fn = f.l2_norm();
    const double s = f.inner(mu.density);
    if (std::abs(s) > opts.solvability_tol * fn)
        throw PreconditionError("Poisson right-hand side is not centred under mu: <f, mu> = " + sci(s) +
                                " (|f| = " + sci(fn) + "); centre it first");
    if (fn == 0.0)
        return FourierField(f.dim(), f.K());
    FourierField u = solve_reduced(gen, gen.reduced_matrix(false), f, "solve_poisson");
    const double res = (gen.apply(u) - f).l2_norm();
    if (!(res <= opts.residual_tol * fn))
        throw NumericalError("solve_poisson residual " + sci(res / fn) + " exceeds tolerance");
    return u;
}

FourierField solve_poisson(const VectorField& b, const FourierField& f, const InvariantMeasure& mu,
                           const SolverOptions& opts, int oversample)
{
    return solve_poisson(Generator(b, f.K(), oversample), f, mu, opts);
}

FourierField solve_adjoint(const Generator& gen, const FourierField& f, const SolverOptions& opts)
{
    if (f.dim() != gen.dim() || f.K() != gen.K())
        throw ShapeError("right-hand side does not match the generator truncation");
    const double fn = f.l2_norm();
    if (std::abs(f.mean()) > opts.solvability_tol * fn)
        throw PreconditionError("adjoint right-hand side has non-zero mean " + sci(f.mean()));
    if (fn == 0.0)
        return FourierField(f.dim(), f.K());
    FourierField rhs(f);
    rhs.coeffs()[rhs.zero_index()] = 0.0;
    FourierField u = solve_reduced(gen, gen.reduced_matrix(true), rhs, "solve_adjoint");
    const double res = (gen.apply_adjoint(u) - f).l2_norm();
    if (!(res <= opts.residual_tol * fn))
        throw NumericalError("solve_adjoint residual " + sci(res / fn) + " exceeds tolerance");
    return u;
}

FourierField solve_adjoint(const VectorField& b, const FourierField& f, const SolverOptions& opts, int oversample)
{
    return solve_adjoint(Generator(b, f.K(), oversample), f, opts);
}

double gradient_normalizer(const ScalarField& B, int points_per_axis)
{
    const int d = B.dim;
    if (d < 1 || d > kMaxDim)
        throw ConfigError("potential dimension must be 1..3");
    int n = points_per_axis;
    if (n <= 0)
        n = d == 1 ? 1 << 14 : (d == 2 ? 512 : 96);
    const std::size_t total = ipow(static_cast<std::size_t>(n), d);
    double acc = 0.0;
    for (std::size_t g = 0; g < total; ++g)
        acc += std::exp(2.0 * B(grid_point(g, d, n)));
    return acc / static_cast<double>(total);
}

InvariantMeasure gradient_oracle(const ScalarField& B, int K, int oversample)
{
    const double Z = gradient_normalizer(B);
    const ScalarField dens{B.dim, [&B, Z](const Point& x) { return std::exp(2.0 * B(x)) / Z; }};
    InvariantMeasure mu(FourierField::from_function(dens, K, oversample));
    const auto grid = mu.density.grid_values(std::max(2 * oversample * K, 2 * K + 1));
    mu.min_grid_value = *std::min_element(grid.begin(), grid.end());
    return mu;
}

FourierField linearize_invariant(const Generator& gen, const VectorField& h, const InvariantMeasure& mu,
                                 const SolverOptions& opts)
{
    if (h.dim != gen.dim())
        throw ShapeError("perturbation dimension does not match the generator");
    const int d = gen.dim();
    const int N = gen.grid_points();
    const std::size_t total = ipow(static_cast<std::size_t>(N), d);
    const auto mg = mu.density.grid_values(N);
    std::vector<std::vector<double>> prod(static_cast<std::size_t>(d), std::vector<double>(total));
    for (std::size_t g = 0; g < total; ++g) {
        const Point hv = h(grid_point(g, d, N));
        for (int j = 0; j < d; ++j)
            prod[static_cast<std::size_t>(j)][g] = hv[j] * mg[g];
    }
    FourierField f(d, gen.K());
    for (int j = 0; j < d; ++j)
        f -= FourierField::from_grid(d, N, prod[static_cast<std::size_t>(j)], gen.K()).derivative(j);
    return solve_adjoint(gen, f, opts);
}

double clt_variance(const Generator& gen, const FourierField& g, const InvariantMeasure& mu,
                    const SolverOptions& opts)
{
    const FourierField gbar = center(g.resized(gen.K()), mu);
    const FourierField u = solve_poisson(gen, gbar, mu, opts);
    const int N = gen.grid_points();
    const auto mg = mu.density.grid_values(N);
    std::vector<double> acc(mg.size(), 0.0);
    for (int j = 0; j < gen.dim(); ++j) {
        const auto du = u.derivative(j).grid_values(N);
        for (std::size_t i = 0; i < acc.size(); ++i)
            acc[i] += du[i] * du[i];
    }
    double s = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i)
        s += acc[i] * mg[i];
    return s / static_cast<double>(acc.size());
}

Eigen::MatrixXd weighted_gram(const BasisSpec& spec, const ScalarField& weight, int depth)
{
    if (weight.dim != spec.dim())
        throw ShapeError("weight dimension does not match the basis");
    const AxisQuadrature q = axis_quadrature(spec, depth);
    const int d = spec.dim();
    const std::size_t n = q.nodes.size();
    const std::size_t total = ipow(n, d);
    std::vector<double> w(total);
    for (std::size_t g = 0; g < total; ++g) {
        Point x{0, 0, 0};
        std::size_t rest = g;
        for (int j = d - 1; j >= 0; --j) {
            x[j] = q.nodes[rest % n];
            rest /= n;
        }
        w[g] = weight(x);
    }
    return quadrature_gram(spec, q, w);
}

Eigen::MatrixXd weighted_gram(const BasisSpec& spec, const FourierField& mu, double power, int depth)
{
    if (mu.dim() != spec.dim())
        throw ShapeError("weight dimension does not match the basis");
    const AxisQuadrature q = axis_quadrature(spec, depth);
    std::vector<double> w = mu.tensor_values(q.nodes);
    for (double& v : w) {
        if (!(v > 0.0))
            throw PreconditionError("weight density must be positive at the quadrature nodes");
        v = std::pow(v, power);
    }
    return quadrature_gram(spec, q, w);
}

FluxSolution invariant_1d_flux(const VectorField& b, int K, int grid_points)
{
    if (b.dim != 1)
        throw ShapeError("the constant-flux construction is one-dimensional");
    const int n = grid_points;
    if (n <= 2 * K)
        throw ConfigError("flux grid too coarse for the requested truncation");
    const auto B = detail::antiderivative(b, n);
    std::vector<double> e(B.size());
    for (std::size_t i = 0; i < B.size(); ++i)
        e[i] = std::exp(-2.0 * B[i]);
    const auto F = detail::cumulative_integral(e);
    const double B1 = B.back();
    // mu = e^{2B} (mu0 + 2 c int_0^x e^{-2B}), periodic when c = mu0 (e^{-2 B1} - 1) / (2 int_0^1 e^{-2B})
    double c = (std::exp(-2.0 * B1) - 1.0) / (2.0 * F.back());
    std::vector<double> grid(static_cast<std::size_t>(n));
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        grid[iu] = std::exp(2.0 * B[iu]) * (1.0 + 2.0 * c * F[iu]);
        mass += grid[iu];
    }
    mass /= n;
    for (double& v : grid)
        v /= mass;
    c /= mass;
    FluxSolution out{InvariantMeasure(FourierField::from_grid(1, n, grid, K)), c, grid};
    out.measure.density.coeffs()[out.measure.density.zero_index()] = 1.0;
    out.measure.min_grid_value = *std::min_element(grid.begin(), grid.end());
    return out;
}

} // namespace driftlab
