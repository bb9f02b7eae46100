#include "driftlab/posterior.hpp"

#include "driftlab/error.hpp"
#include "driftlab/hash.hpp"
#include "driftlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace driftlab {

namespace {

/// Apply the wavelet transform to every column, then to every row.
Eigen::MatrixXd congruence(const BasisSpec& spec, Eigen::MatrixXd g)
{
    const auto n = static_cast<std::size_t>(g.rows());
    for (Eigen::Index c = 0; c < g.cols(); ++c)
        forward_transform(spec, std::span<double>(g.col(c).data(), n));
    g.transposeInPlace();
    for (Eigen::Index c = 0; c < g.cols(); ++c)
        forward_transform(spec, std::span<double>(g.col(c).data(), n));
    return g;
}

} // namespace

GaussianPosterior::GaussianPosterior(BasisSpec spec, PriorSpec prior, double T, Eigen::MatrixXd precision,
                                     Eigen::MatrixXd rhs, std::uint64_t stats_hash)
    : spec_(std::move(spec)), prior_(prior), T_(T), precision_(std::move(precision)), rhs_(std::move(rhs)),
      mean_(spec_, Coords::Multiresolution, static_cast<int>(rhs_.cols())), stats_hash_(stats_hash)
{
    llt_.compute(precision_);
    if (llt_.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(precision_, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        throw NumericalError("posterior precision is not positive definite (eigenvalues in [" +
                             std::to_string(ev.minCoeff()) + ", " + std::to_string(ev.maxCoeff()) + "])");
    }
    mean_.values() = llt_.solve(rhs_);
}

Eigen::MatrixXd GaussianPosterior::covariance() const
{
    const auto n = precision_.rows();
    return llt_.solve(Eigen::MatrixXd::Identity(n, n));
}

double GaussianPosterior::normal_equation_residual() const
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < rhs_.cols(); ++j) {
        const double r = (precision_ * mean_.values().col(j) - rhs_.col(j)).norm();
        const double scale = rhs_.col(j).norm();
        worst = std::max(worst, scale > 0.0 ? r / scale : r);
    }
    return worst;
}

std::uint64_t GaussianPosterior::hash() const
{
    Fnv1a h;
    h.update("posterior");
    h.update_value(spec_.hash());
    h.update_value(prior_.alpha);
    h.update_value(prior_.a);
    h.update_value(T_);
    h.update_value(stats_hash_);
    h.update(precision_.data(), static_cast<std::size_t>(precision_.size()) * sizeof(double));
    h.update(rhs_.data(), static_cast<std::size_t>(rhs_.size()) * sizeof(double));
    return h.digest();
}

GaussianPosterior fit(const SufficientStatistics& stats, const PriorSpec& prior)
{
    prior.validate();
    if (prior.level != stats.spec.level() || prior.dim != stats.spec.dim())
        throw ShapeError("prior level/dimension (" + std::to_string(prior.level) + ", " + std::to_string(prior.dim) +
                         ") does not match the statistics basis (" + std::to_string(stats.spec.level()) + ", " +
                         std::to_string(stats.spec.dim()) + ")");
    const BasisSpec& spec = stats.spec;
    Eigen::MatrixXd P = stats.T * congruence(spec, stats.gram);
    P.diagonal() += prior_precision_diagonal(spec, prior);
    // symmetrise against transform round-off
    P = 0.5 * (P + P.transpose()).eval();

    Eigen::MatrixXd rhs = stats.m;
    for (Eigen::Index j = 0; j < rhs.cols(); ++j)
        forward_transform(spec, std::span<double>(rhs.col(j).data(), static_cast<std::size_t>(rhs.rows())));
    return GaussianPosterior(spec, prior, stats.T, std::move(P), std::move(rhs), stats.hash());
}

std::vector<CoefficientField> sample(const GaussianPosterior& post, std::size_t n, std::uint64_t seed,
                                     const SampleOptions& opts)
{
    if (n < 1)
        throw ConfigError("sample count must be at least 1");
    const auto v = post.precision().rows();
    const int d = post.dim();
    std::vector<CoefficientField> draws(n, post.mean());
    const auto U = post.llt().matrixU();

    auto draw_range = [&](std::size_t begin, std::size_t end) {
        Eigen::MatrixXd xi(v, d);
        for (std::size_t i = begin; i < end; ++i) {
            if (opts.zero_noise)
                continue;
            Rng rng(derive_seed(seed, i));
            for (int j = 0; j < d; ++j)
                for (Eigen::Index r = 0; r < v; ++r)
                    xi(r, j) = rng.normal();
            // L^{-T} xi has covariance (L L^T)^{-1}
            U.solveInPlace(xi);
            draws[i].values() += xi;
        }
    };

    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, opts.threads)), n);
    if (threads == 1) {
        draw_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t per = (n + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(draw_range, t * per, std::min(n, (t + 1) * per));
        for (auto& th : pool)
            th.join();
    }
    return draws;
}

FunctionalMoments functional_moments(const GaussianPosterior& post, const CoefficientField& phi, int j)
{
    if (phi.components() != 1 || !(phi.spec() == post.spec()))
        throw ShapeError("functional must be a scalar field over the posterior basis");
    if (j < 0 || j >= post.dim())
        throw ShapeError("coordinate index " + std::to_string(j) + " out of range");
    const auto p = to_coords(phi, Coords::Multiresolution);
    FunctionalMoments out;
    out.mean = p.values().col(0).dot(post.mean().values().col(j));
    const Eigen::VectorXd w = post.llt().matrixL().solve(p.values().col(0));
    out.variance = w.squaredNorm();
    return out;
}

int band_grid_points(const BasisSpec& spec) { return 1 << (spec.level() + 4); }

Eigen::MatrixXd grid_values(const CoefficientField& c, int n)
{
    const BasisSpec& spec = c.spec();
    const int d = spec.dim();
    const int M = spec.per_axis();
    const auto sc = to_coords(c, Coords::ScalingLevelJ);

    // E(g, r) = Phi_{J,r}(g / n)
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, M);
    AxisActive ax;
    for (int g = 0; g < n; ++g) {
        spec.axis_active(static_cast<double>(g) / n, ax);
        for (int a = 0; a < ax.count; ++a)
            E(g, ax.index[a]) += ax.value[a];
    }

    Eigen::Index total = 1;
    for (int k = 0; k < d; ++k)
        total *= n;
    Eigen::MatrixXd out(total, c.components());
    for (int comp = 0; comp < c.components(); ++comp) {
        const Eigen::VectorXd coef = sc.values().col(comp);
        if (d == 1) {
            out.col(comp) = E * coef;
        } else if (d == 2) {
            // coefficients row-major M x M: C(r0, r1)
            const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> C(
                coef.data(), M, M);
            const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> G = E * C * E.transpose();
            out.col(comp) = Eigen::Map<const Eigen::VectorXd>(G.data(), total);
        } else {
            // contract axis 2, then axes 0 and 1 slice by slice
            const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> C(
                coef.data(), M * M, M);
            const Eigen::MatrixXd A = C * E.transpose(); // (r0 r1) x g2
            for (int g2 = 0; g2 < n; ++g2) {
                Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> slice(M, M);
                for (int r0 = 0; r0 < M; ++r0)
                    for (int r1 = 0; r1 < M; ++r1)
                        slice(r0, r1) = A(r0 * M + r1, g2);
                const Eigen::MatrixXd G = E * slice * E.transpose(); // g0 x g1
                for (int g0 = 0; g0 < n; ++g0)
                    for (int g1 = 0; g1 < n; ++g1)
                        out((static_cast<Eigen::Index>(g0) * n + g1) * n + g2, comp) = G(g0, g1);
            }
        }
    }
    return out;
}

double credible_band(const std::vector<CoefficientField>& draws, const CoefficientField& center, double level)
{
    if (draws.size() < 100)
        throw StatisticsError("credible band needs at least 100 draws, got " + std::to_string(draws.size()));
    if (!(level > 0.0 && level <= 1.0))
        throw ConfigError("credible level must be in (0,1]");
    const int n = band_grid_points(center.spec());
    const Eigen::MatrixXd c = grid_values(center, n);
    std::vector<double> sup(draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
        if (!(draws[i].spec() == center.spec()) || draws[i].components() != center.components())
            throw ShapeError("draw " + std::to_string(i) + " does not match the band centre");
        sup[i] = (grid_values(draws[i], n) - c).cwiseAbs().maxCoeff();
    }
    std::sort(sup.begin(), sup.end());
    const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(sup.size())));
    return sup[std::max<std::size_t>(k, 1) - 1];
}

double isometry_gap(const Eigen::MatrixXd& gram_hat, const Eigen::MatrixXd& gamma)
{
    if (gram_hat.rows() != gamma.rows() || gram_hat.cols() != gamma.cols() || gamma.rows() != gamma.cols())
        throw ShapeError("Gram matrices must be square and of equal size");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw PreconditionError("reference Gram matrix is not positive definite");
    const Eigen::MatrixXd isq = es.operatorInverseSqrt();
    const Eigen::MatrixXd D = isq * (gram_hat - gamma) * isq;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(0.5 * (D + D.transpose()), Eigen::EigenvaluesOnly);
    return ed.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace driftlab
