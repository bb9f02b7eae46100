#include "driftlab/green1d.hpp"

#include "detail/periodic1d.hpp"
#include "driftlab/error.hpp"

#include <cmath>

namespace driftlab {

double PeriodicGrid1d::at(double x) const
{
    const int n = size();
    const double t = wrap_unit(x) * n;
    const int i = static_cast<int>(std::floor(t));
    const double w = t - i;
    return (1.0 - w) * values[static_cast<std::size_t>(i % n)] + w * values[static_cast<std::size_t>((i + 1) % n)];
}

double PeriodicGrid1d::integral() const
{
    double acc = 0.0;
    for (double v : values)
        acc += v;
    return acc / static_cast<double>(values.size());
}

GreenKernel1d::GreenKernel1d(const VectorField& b, int grid_points) : n_(grid_points)
{
    if (b.dim != 1)
        throw ShapeError("the Green kernel construction is one-dimensional");
    const auto B = detail::antiderivative(b, n_);
    const std::size_t m = B.size();
    p_.resize(m);
    q_.resize(m);
    std::vector<double> sq(m);
    for (std::size_t i = 0; i < m; ++i) {
        p_[i] = std::exp(2.0 * B[i]);
        q_[i] = 1.0 / p_[i];
        sq[i] = (1.0 - static_cast<double>(i) / n_) * q_[i];
    }
    P_ = detail::cumulative_integral(p_);
    Q_ = detail::cumulative_integral(q_);
    R_ = detail::cumulative_integral(sq);
    std::vector<double> pq(m), pr(m);
    for (std::size_t i = 0; i < m; ++i) {
        pq[i] = p_[i] * Q_[i];
        pr[i] = p_[i] * R_[i];
    }
    PQ_ = detail::cumulative_integral(pq);
    PR_ = detail::cumulative_integral(pr);
    P1_ = P_.back();
    Q1_ = Q_.back();
    R1_ = R_.back();
    S1_ = Q1_ * P1_ - PQ_.back();  // int p (Q1 - Q)
    PR1_ = R1_ * P1_ - PR_.back(); // int p (R1 - R)

    // constant-flux invariant density: mu = e^{2B}(1 + 2c int_0^x e^{-2B}), normalised
    const double c = (q_.back() - 1.0) / (2.0 * Q1_);
    mu_.resize(m);
    std::vector<double> raw(m);
    for (std::size_t i = 0; i < m; ++i)
        raw[i] = p_[i] * (1.0 + 2.0 * c * Q_[i]);
    double mass = 0.0;
    for (int i = 0; i < n_; ++i)
        mass += raw[static_cast<std::size_t>(i)];
    mass /= n_;
    for (std::size_t i = 0; i < m; ++i)
        mu_[i] = raw[i] / mass;
}

double GreenKernel1d::density(double x) const { return detail::interpolate(mu_, wrap_unit(x)); }

PeriodicGrid1d GreenKernel1d::density_grid() const
{
    return PeriodicGrid1d{std::vector<double>(mu_.begin(), mu_.end() - 1)};
}

double GreenKernel1d::row_integral(double x) const
{
    using detail::interpolate;
    const double Qx = interpolate(Q_, x);
    const double Px = interpolate(P_, x);
    const double PQx = interpolate(PQ_, x);
    return 2.0 * (Qx * Px - PQx) - 2.0 * PR1_ - (2.0 / Q1_) * (Qx - R1_) * S1_;
}

double GreenKernel1d::kernel(double x, double y) const
{
    using detail::interpolate;
    x = wrap_unit(x);
    y = wrap_unit(y);
    const double Qx = interpolate(Q_, x);
    const double py = interpolate(p_, y);
    const double Qy = interpolate(Q_, y);
    const double Ry = interpolate(R_, y);
    double k = 2.0 * py * ((y < x ? Qx - Qy : 0.0) - (R1_ - Ry)) - (2.0 / Q1_) * py * (Q1_ - Qy) * (Qx - R1_);
    return k - interpolate(mu_, y) * row_integral(x);
}

double GreenKernel1d::response_derivative(double y, double x) const
{
    using detail::interpolate;
    x = wrap_unit(x);
    y = wrap_unit(y);
    const double px = interpolate(p_, x);
    const double Qx = interpolate(Q_, x);
    const double qy = interpolate(q_, y);
    const double Py = interpolate(P_, y);
    return qy * (2.0 * px * (x < y ? 1.0 : 0.0) - (2.0 / Q1_) * px * (Q1_ - Qx) -
                 interpolate(mu_, x) * (2.0 * Py - (2.0 / Q1_) * S1_));
}

PeriodicGrid1d GreenKernel1d::kernel_row(double x) const
{
    x = wrap_unit(x);
    using detail::interpolate;
    const double Qx = interpolate(Q_, x);
    const double Ik = row_integral(x);
    PeriodicGrid1d out;
    out.values.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const double y = static_cast<double>(i) / n_;
        const double k = 2.0 * p_[iu] * ((y < x ? Qx - Q_[iu] : 0.0) - (R1_ - R_[iu])) -
                         (2.0 / Q1_) * p_[iu] * (Q1_ - Q_[iu]) * (Qx - R1_);
        out.values[iu] = k - mu_[iu] * Ik;
    }
    return out;
}

double GreenKernel1d::pointwise_variance(double x) const
{
    x = wrap_unit(x);
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double y = static_cast<double>(i) / n_;
        const double g = response_derivative(y, x);
        acc += g * g * mu_[static_cast<std::size_t>(i)];
    }
    return acc / n_;
}

PeriodicGrid1d green_kernel_1d(const VectorField& b, double x, int grid_points)
{
    return GreenKernel1d(b, grid_points).kernel_row(x);
}

} // namespace driftlab
