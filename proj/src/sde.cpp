#include "driftlab/sde.hpp"

#include "driftlab/error.hpp"
#include "driftlab/hash.hpp"
#include "driftlab/rng.hpp"

#include <cmath>
#include <string>

namespace driftlab {

DiffusionPath::DiffusionPath(int dim, double delta, std::size_t n_steps, std::uint64_t seed, Point x0,
                             std::vector<double> positions)
    : dim_(dim), delta_(delta), n_steps_(n_steps), seed_(seed), x0_(x0), positions_(std::move(positions))
{
    if (dim < 1 || dim > kMaxDim)
        throw ConfigError("path dimension must be 1..3, got " + std::to_string(dim));
    if (positions_.size() != (n_steps + 1) * static_cast<std::size_t>(dim))
        throw ShapeError("path positions have " + std::to_string(positions_.size()) + " entries, expected " +
                         std::to_string((n_steps + 1) * static_cast<std::size_t>(dim)));
}

std::uint64_t DiffusionPath::hash() const
{
    Fnv1a h;
    h.update("path");
    h.update_value(dim_);
    h.update_value(delta_);
    h.update_value(static_cast<std::uint64_t>(n_steps_));
    h.update_value(seed_);
    for (int k = 0; k < dim_; ++k)
        h.update_value(x0_[k]);
    h.update_doubles(positions_);
    return h.digest();
}

std::size_t step_count(double T, double delta)
{
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw ConfigError("delta must be positive, got " + std::to_string(delta));
    if (!(T > 0.0) || !std::isfinite(T))
        throw ConfigError("horizon T must be positive, got " + std::to_string(T));
    const double ratio = T / delta;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * n)
        throw ConfigError("T / delta must be a positive integer, got " + std::to_string(ratio));
    return static_cast<std::size_t>(n);
}

DiffusionPath simulate(const VectorField& b, const Point& x0, double T, double delta, std::uint64_t seed,
                       double noise_scale)
{
    const int d = b.dim;
    if (d < 1 || d > kMaxDim)
        throw ConfigError("drift dimension must be 1..3, got " + std::to_string(d));
    if (noise_scale != 0.0 && noise_scale != 1.0)
        throw ConfigError("noise_scale must be 0 or 1");
    const std::size_t n = step_count(T, delta);
    const auto du = static_cast<std::size_t>(d);

    std::vector<double> pos((n + 1) * du);
    for (std::size_t k = 0; k < du; ++k)
        pos[k] = x0[k];

    Rng rng(seed);
    const double sd = std::sqrt(delta);
    Point x = x0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point drift = b(wrap_point(x, d));
        for (std::size_t k = 0; k < du; ++k) {
            if (!std::isfinite(drift[k]))
                throw SimulationError("drift is not finite at step " + std::to_string(i));
            double inc = drift[k] * delta;
            if (noise_scale != 0.0)
                inc += sd * rng.normal();
            x[k] += inc;
            pos[(i + 1) * du + k] = x[k];
        }
    }
    return DiffusionPath(d, delta, n, seed, x0, std::move(pos));
}

std::vector<double> wrap(const DiffusionPath& path)
{
    std::vector<double> out(path.positions().begin(), path.positions().end());
    for (double& v : out)
        v = wrap_unit(v);
    return out;
}

double ergodic_average(const DiffusionPath& path, const ScalarField& g)
{
    if (g.dim != path.dim())
        throw ShapeError("test function dimension does not match the path");
    const std::size_t n = path.n_steps();
    // (1/T) sum g delta with T = n delta
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += g(path.wrapped(i));
    return acc / static_cast<double>(n);
}

} // namespace driftlab
