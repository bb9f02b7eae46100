#pragma once

// Periodic Green kernel of L = 1/2 d^2 + b d on the circle.
//
// kernel(x, y) is the function of y with
//   int kernel(x, y) g(y) dy = (L^{-1}[g - int g dmu])(x),
// the solution being normalised to zero Lebesgue mean. Read the other way,
// response(y, x) = kernel(y, x) is y -> L^{-1}[delta_x - mu(x)](y), whose
// y-derivative enters the pointwise covariance of the invariant density.
// Built from the integrating factor p = e^{2B}, B' = b, on a uniform grid;
// int_0^1 b need not vanish.

#include "driftlab/types.hpp"

#include <vector>

namespace driftlab {

/// Values on the grid i/n, i = 0..n-1, of a 1-periodic function.
struct PeriodicGrid1d {
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    /// Linear interpolation at x mod 1.
    double at(double x) const;
    /// Periodic trapezoid rule for int_0^1.
    double integral() const;
};

class GreenKernel1d {
public:
    explicit GreenKernel1d(const VectorField& b, int grid_points = 1 << 14);

    double kernel(double x, double y) const;
    double response(double y, double x) const { return kernel(y, x); }
    /// d/dy response(y, x), closed form.
    double response_derivative(double y, double x) const;

    /// Invariant density mu at x.
    double density(double x) const;
    PeriodicGrid1d density_grid() const;

    /// y -> kernel(x, y) on the grid.
    PeriodicGrid1d kernel_row(double x) const;

    /// int (d/dy response(y, x))^2 mu(y) dy.
    double pointwise_variance(double x) const;

    int grid_points() const { return n_; }

private:
    double row_integral(double x) const; // int_0^1 k_x(y) dy before centring

    int n_;
    // values at i/n, i = 0..n
    std::vector<double> p_, q_, mu_, P_, Q_, R_, PQ_, PR_;
    double P1_ = 0, Q1_ = 0, R1_ = 0, S1_ = 0, PR1_ = 0;
};

/// y -> G(x, y) on a grid of n points: the reproducing kernel at x.
PeriodicGrid1d green_kernel_1d(const VectorField& b, double x, int grid_points = 1 << 14);

} // namespace driftlab
