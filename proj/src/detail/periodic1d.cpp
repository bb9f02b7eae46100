#include "detail/periodic1d.hpp"

#include "driftlab/error.hpp"
#include "driftlab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace driftlab::detail {

std::vector<double> antiderivative(const VectorField& b, int n)
{
    if (b.dim != 1)
        throw ShapeError("one-dimensional construction needs a scalar drift");
    if (n < 8)
        throw ConfigError("grid too coarse");
    std::vector<cplx> buf(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        buf[static_cast<std::size_t>(i)] = b(Point{static_cast<double>(i) / n, 0, 0})[0];
    fft(buf, 1, n, -1);
    for (auto& c : buf)
        c /= static_cast<double>(n);
    const double mean = buf[0].real();
    buf[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const int k = i <= n / 2 ? i : i - n;
        if (2 * k == n) {
            buf[static_cast<std::size_t>(i)] = 0.0;
            continue;
        }
        buf[static_cast<std::size_t>(i)] /= cplx(0.0, 2.0 * std::numbers::pi * k);
    }
    fft(buf, 1, n, +1);
    std::vector<double> B(static_cast<std::size_t>(n) + 1);
    const double base = buf[0].real();
    for (int i = 0; i <= n; ++i)
        B[static_cast<std::size_t>(i)] = mean * i / n + buf[static_cast<std::size_t>(i % n)].real() - base;
    return B;
}

std::vector<double> cumulative_integral(const std::vector<double>& f)
{
    const std::size_t m = f.size();
    if (m < 5)
        throw ConfigError("cumulative integral needs at least 5 points");
    const std::size_t n = m - 1;
    const double h = 1.0 / static_cast<double>(n);
    std::vector<double> F(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double cell;
        if (i == 0)
            cell = 9 * f[0] + 19 * f[1] - 5 * f[2] + f[3];
        else if (i == n - 1)
            cell = f[n - 3] - 5 * f[n - 2] + 19 * f[n - 1] + 9 * f[n];
        else
            cell = -f[i - 1] + 13 * f[i] + 13 * f[i + 1] - f[i + 2];
        F[i + 1] = F[i] + cell * h / 24.0;
    }
    return F;
}

double interpolate(const std::vector<double>& v, double x)
{
    const std::size_t n = v.size() - 1;
    const double t = std::clamp(x, 0.0, 1.0) * static_cast<double>(n);
    auto i0 = static_cast<std::ptrdiff_t>(std::floor(t)) - 1;
    i0 = std::clamp<std::ptrdiff_t>(i0, 0, static_cast<std::ptrdiff_t>(n) - 3);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int c = 0; c < 4; ++c)
            if (c != a)
                w *= (t - static_cast<double>(i0 + c)) / static_cast<double>(a - c);
        acc += w * v[static_cast<std::size_t>(i0 + a)];
    }
    return acc;
}

} // namespace driftlab::detail
