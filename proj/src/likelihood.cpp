#include "driftlab/likelihood.hpp"

#include "driftlab/error.hpp"
#include "driftlab/hash.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace driftlab {

namespace {

void require_vector_field(const CoefficientField& b, int d, const char* what)
{
    if (b.spec().dim() != d || b.components() != d)
        throw ShapeError(std::string(what) + " must be a " + std::to_string(d) + "-component field over a " +
                         std::to_string(d) + "-dimensional basis");
}

struct Partial {
    Eigen::MatrixXd gram; // upper triangle only
    Eigen::MatrixXd m;
};

void accumulate_chunk(const DiffusionPath& path, const BasisSpec& spec, std::size_t begin, std::size_t end,
                      Partial& out)
{
    out.gram.setZero();
    out.m.setZero();
    const int d = path.dim();
    const auto pos = path.positions();
    std::vector<std::size_t> idx;
    std::vector<double> val;
    idx.reserve(512);
    val.reserve(512);
    double* g = out.gram.data();
    const auto ld = static_cast<std::size_t>(out.gram.rows());
    for (std::size_t i = begin; i < end; ++i) {
        idx.clear();
        val.clear();
        spec.for_each_active(path.wrapped(i), [&](std::size_t f, double v) {
            idx.push_back(f);
            val.push_back(v);
        });
        const std::size_t na = idx.size();
        for (std::size_t a = 0; a < na; ++a) {
            const double va = val[a];
            const std::size_t ia = idx[a];
            for (std::size_t c = 0; c < na; ++c) {
                const std::size_t ic = idx[c];
                if (ia <= ic)
                    g[ic * ld + ia] += va * val[c];
            }
        }
        for (int k = 0; k < d; ++k) {
            const double inc = pos[(i + 1) * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] -
                               pos[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)];
            for (std::size_t a = 0; a < na; ++a)
                out.m(static_cast<Eigen::Index>(idx[a]), k) += val[a] * inc;
        }
    }
}

} // namespace

std::uint64_t SufficientStatistics::hash() const
{
    Fnv1a h;
    h.update("stats");
    h.update_value(basis_hash);
    h.update_value(path_hash);
    h.update_value(T);
    h.update_value(delta);
    h.update(gram.data(), static_cast<std::size_t>(gram.size()) * sizeof(double));
    h.update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    return h.digest();
}

SufficientStatistics sufficient_stats(const DiffusionPath& path, const BasisSpec& spec, const StatsOptions& opts)
{
    if (spec.dim() != path.dim())
        throw ShapeError("basis dimension " + std::to_string(spec.dim()) + " does not match path dimension " +
                         std::to_string(path.dim()));
    if (opts.chunk_steps == 0)
        throw ConfigError("chunk_steps must be positive");
    const auto v = static_cast<Eigen::Index>(spec.size());
    const int d = path.dim();
    const std::size_t n = path.n_steps();
    const std::size_t chunks = (n + opts.chunk_steps - 1) / opts.chunk_steps;
    const std::size_t threads = static_cast<std::size_t>(std::max(1, opts.threads));
    const std::size_t workers = std::min(threads, chunks);

    std::vector<Partial> partial(workers);
    for (auto& p : partial) {
        p.gram = Eigen::MatrixXd::Zero(v, v);
        p.m = Eigen::MatrixXd::Zero(v, d);
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(v, v);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(v, d);

    for (std::size_t wave = 0; wave < chunks; wave += workers) {
        const std::size_t in_wave = std::min(workers, chunks - wave);
        auto job = [&](std::size_t w) {
            const std::size_t c = wave + w;
            accumulate_chunk(path, spec, c * opts.chunk_steps, std::min(n, (c + 1) * opts.chunk_steps), partial[w]);
        };
        if (in_wave == 1) {
            job(0);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < in_wave; ++w)
                pool.emplace_back(job, w);
            for (auto& t : pool)
                t.join();
        }
        for (std::size_t w = 0; w < in_wave; ++w) {
            gram += partial[w].gram;
            m += partial[w].m;
        }
    }

    gram /= static_cast<double>(n);
    gram.triangularView<Eigen::StrictlyLower>() = gram.transpose().triangularView<Eigen::StrictlyLower>();

    SufficientStatistics s{spec, path.horizon(), path.delta(), std::move(gram), std::move(m), spec.hash(), path.hash()};
    return s;
}

double log_likelihood(const DiffusionPath& path, const CoefficientField& b)
{
    const int d = path.dim();
    require_vector_field(b, d, "drift");
    FieldEvaluator eval(b);
    const double delta = path.delta();
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < path.n_steps(); ++i) {
        const Point bx = eval(path.wrapped(i));
        const Point x0 = path.position(i);
        const Point x1 = path.position(i + 1);
        for (int k = 0; k < d; ++k) {
            quad += bx[k] * bx[k];
            lin += bx[k] * (x1[k] - x0[k]);
        }
    }
    return -0.5 * quad * delta + lin;
}

double log_likelihood(const SufficientStatistics& stats, const CoefficientField& b)
{
    require_vector_field(b, stats.dim(), "drift");
    if (!(b.spec() == stats.spec))
        throw ShapeError("drift basis does not match the statistics basis");
    const auto th = to_coords(b, Coords::ScalingLevelJ);
    double quad = 0.0;
    double lin = 0.0;
    for (int j = 0; j < stats.dim(); ++j) {
        const auto t = th.component(j);
        quad += t.dot(stats.gram * t);
        lin += t.dot(stats.m.col(j));
    }
    return -0.5 * stats.T * quad + lin;
}

double hellinger_distance(const SufficientStatistics& stats, const CoefficientField& b1, const CoefficientField& b2)
{
    require_vector_field(b1, stats.dim(), "b1");
    require_vector_field(b2, stats.dim(), "b2");
    if (!(b1.spec() == stats.spec) || !(b2.spec() == stats.spec))
        throw ShapeError("field basis does not match the statistics basis");
    const Eigen::MatrixXd diff =
        to_coords(b1, Coords::ScalingLevelJ).values() - to_coords(b2, Coords::ScalingLevelJ).values();
    double acc = 0.0;
    for (int j = 0; j < stats.dim(); ++j)
        acc += diff.col(j).dot(stats.gram * diff.col(j));
    return std::sqrt(std::max(acc, 0.0));
}

LanTerms lan_decomposition(const DiffusionPath& path, const CoefficientField& b0, const CoefficientField& h)
{
    const int d = path.dim();
    require_vector_field(b0, d, "b0");
    require_vector_field(h, d, "h");
    if (!(b0.spec() == h.spec()))
        throw ShapeError("b0 and h must share a basis");
    const double T = path.horizon();
    const double rt = std::sqrt(T);
    const double delta = path.delta();

    CoefficientField shifted = to_coords(b0, Coords::ScalingLevelJ);
    shifted.values() += to_coords(h, Coords::ScalingLevelJ).values() / rt;

    LanTerms t;
    t.ell_b0 = log_likelihood(path, b0);
    t.ell_shifted = log_likelihood(path, shifted);

    FieldEvaluator e0(b0), eh(h);
    double w = 0.0;
    double q = 0.0;
    for (std::size_t i = 0; i < path.n_steps(); ++i) {
        const Point x = path.wrapped(i);
        const Point bx = e0(x);
        const Point hx = eh(x);
        const Point p0 = path.position(i);
        const Point p1 = path.position(i + 1);
        for (int k = 0; k < d; ++k) {
            w += hx[k] * (p1[k] - p0[k] - bx[k] * delta);
            q += hx[k] * hx[k];
        }
    }
    t.W = w / rt;
    t.quad = q * delta / T;
    t.residual = std::abs(t.ell_shifted - t.ell_b0 - t.W + 0.5 * t.quad);
    return t;
}

} // namespace driftlab
