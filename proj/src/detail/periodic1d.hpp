#pragma once

// Helpers for d = 1 integrating-factor constructions on a uniform grid.

#include "driftlab/types.hpp"

#include <vector>

namespace driftlab::detail {

/// B(x_i) = int_0^{x_i} b at x_i = i/n, i = 0..n, from the trigonometric
/// interpolant of b sampled at i/n (exact antiderivative of the interpolant).
std::vector<double> antiderivative(const VectorField& b, int n);

/// F_i = int_0^{x_i} f at x_i = i/n, i = 0..n, from f at the same n+1 points.
/// Fourth-order cell rules, one-sided in the end cells.
std::vector<double> cumulative_integral(const std::vector<double>& f);

/// Four-point Lagrange interpolation of values at i/n, i = 0..n, at x in [0,1].
double interpolate(const std::vector<double>& v, double x);

} // namespace driftlab::detail
