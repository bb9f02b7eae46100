#pragma once

// Euler-Maruyama simulation of dX = b(X) dt + dW with a 1-periodic drift.
//
// Positions are stored unwrapped in R^d so that X_{i+1} - X_i is the true
// increment; the drift is evaluated at the wrapped position. Each step draws
// d standard normals from one Rng(seed) stream, coordinate by coordinate.

#include "driftlab/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace driftlab {

class DiffusionPath {
public:
    DiffusionPath(int dim, double delta, std::size_t n_steps, std::uint64_t seed, Point x0,
                  std::vector<double> positions);

    int dim() const { return dim_; }
    double delta() const { return delta_; }
    std::size_t n_steps() const { return n_steps_; }
    /// T = n_steps * delta.
    double horizon() const { return static_cast<double>(n_steps_) * delta_; }
    std::uint64_t seed() const { return seed_; }
    const Point& x0() const { return x0_; }

    /// Row-major (n_steps+1) x d unwrapped positions.
    std::span<const double> positions() const { return positions_; }

    Point position(std::size_t i) const
    {
        Point p{0.0, 0.0, 0.0};
        for (int k = 0; k < dim_; ++k)
            p[k] = positions_[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(k)];
        return p;
    }
    Point wrapped(std::size_t i) const { return wrap_point(position(i), dim_); }

    /// Content hash of header fields and positions.
    std::uint64_t hash() const;

private:
    int dim_;
    double delta_;
    std::size_t n_steps_;
    std::uint64_t seed_;
    Point x0_;
    std::vector<double> positions_;
};

/// n = T / delta, which must be an integer to relative precision 1e-9.
std::size_t step_count(double T, double delta);

/// noise_scale must be 0 (deterministic Euler) or 1.
DiffusionPath simulate(const VectorField& b, const Point& x0, double T, double delta, std::uint64_t seed,
                       double noise_scale = 1.0);

/// Componentwise fractional parts of all positions, row-major (n_steps+1) x d.
std::vector<double> wrap(const DiffusionPath& path);

/// Left-point Riemann sum (1/T) sum_{i<n} g(X_i mod 1) delta.
double ergodic_average(const DiffusionPath& path, const ScalarField& g);

} // namespace driftlab
