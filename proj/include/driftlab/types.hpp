#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

namespace driftlab {

/// Largest supported torus dimension.
inline constexpr int kMaxDim = 3;

/// A point of R^d or T^d; only the first d entries are meaningful.
using Point = std::array<double, kMaxDim>;

/// Reduce a coordinate to [0,1).
inline double wrap_unit(double x)
{
    double r = x - std::floor(x);
    // x slightly below an integer can round to exactly 1
    return r >= 1.0 ? 0.0 : r;
}

inline Point wrap_point(const Point& x, int d)
{
    Point r{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k)
        r[k] = wrap_unit(x[k]);
    return r;
}

/// Periodic vector field b: T^d -> R^d given by a callable.
struct VectorField {
    int dim = 1;
    std::function<Point(const Point&)> fn;

    Point operator()(const Point& x) const { return fn(x); }
};

/// Periodic scalar field g: T^d -> R given by a callable.
struct ScalarField {
    int dim = 1;
    std::function<double(const Point&)> fn;

    double operator()(const Point& x) const { return fn(x); }
};

} // namespace driftlab
