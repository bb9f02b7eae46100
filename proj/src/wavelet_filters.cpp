#include "driftlab/wavelet_filters.hpp"

#include "driftlab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace driftlab {

namespace {

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace

std::vector<double> daubechies_lowpass(int S)
{
    if (S < 1 || S > 10)
        throw ConfigError("Daubechies vanishing-moment count must be in [1,10], got " + std::to_string(S));

    using cplx = std::complex<double>;

    // P(y) = sum_k C(S-1+k, k) y^k satisfies |m0|^2 = cos^{2S}(xi/2) P(sin^2(xi/2)).
    const int deg = S - 1;
    std::vector<cplx> zroots;
    if (deg > 0) {
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
        const double lead = binomial(S - 1 + deg, deg);
        for (int i = 0; i < deg; ++i)
            companion(0, i) = -binomial(S - 1 + deg - 1 - i, deg - 1 - i) / lead;
        for (int i = 1; i < deg; ++i)
            companion(i, i - 1) = 1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
        for (int i = 0; i < deg; ++i) {
            const cplx y = es.eigenvalues()(i);
            // y = (2 - z - 1/z)/4  <=>  z^2 - (2 - 4y) z + 1 = 0; keep the root inside the circle
            const cplx p = 2.0 - 4.0 * y;
            const cplx disc = std::sqrt(p * p - 4.0);
            cplx z = 0.5 * (p + disc);
            if (std::abs(z) > 1.0)
                z = 0.5 * (p - disc);
            zroots.push_back(z);
        }
    }

    // m(z) = ((1+z)/2)^S prod (z - z_i)/(1 - z_i), coefficients in ascending powers.
    std::vector<cplx> poly{1.0};
    auto multiply = [&poly](cplx c0, cplx c1) {
        std::vector<cplx> out(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            out[i] += c0 * poly[i];
            out[i + 1] += c1 * poly[i];
        }
        poly = std::move(out);
    };
    for (int i = 0; i < S; ++i)
        multiply(0.5, 0.5);
    for (const cplx& z : zroots)
        multiply(-z / (1.0 - z), 1.0 / (1.0 - z));

    std::vector<double> h(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i)
        h[i] = std::sqrt(2.0) * poly[i].real();
    // conventional ordering: largest taps first
    std::reverse(h.begin(), h.end());
    return h;
}

std::vector<double> cascade_scaling_function(const std::vector<double>& lowpass, int depth)
{
    const int L = static_cast<int>(lowpass.size());
    if (L < 2)
        throw ConfigError("scaling filter must have at least two taps");
    const double s2 = std::sqrt(2.0);

    // Values at the integers: eigenvector of M_{nm} = sqrt2 h_{2n-m} for eigenvalue 1,
    // normalised by sum_n phi(n) = 1.
    const int n = L; // integers 0..L-1
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int k = 2 * i - j;
            if (k >= 0 && k < L)
                A(i, j) = s2 * lowpass[k];
        }
    A -= Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd ints = A.fullPivLu().solve(rhs);

    std::vector<double> prev(ints.data(), ints.data() + n);
    for (int j = 1; j <= depth; ++j) {
        const int step = 1 << (j - 1); // index shift of one integer on the previous grid
        const std::size_t count = static_cast<std::size_t>(L - 1) * (std::size_t{1} << j) + 1;
        std::vector<double> cur(count, 0.0);
        // phi(x) = sqrt2 sum_m h_m phi(2x - m) with x = k/2^j: 2x - m sits at index
        // k - m 2^{j-1} of the previous grid.
        for (std::size_t k = 0; k < count; ++k) {
            if (k % 2 == 0) {
                cur[k] = prev[k / 2];
                continue;
            }
            double acc = 0.0;
            for (int m = 0; m < L; ++m) {
                const long long idx = static_cast<long long>(k) - static_cast<long long>(m) * step;
                if (idx >= 0 && idx < static_cast<long long>(prev.size()))
                    acc += lowpass[m] * prev[static_cast<std::size_t>(idx)];
            }
            cur[k] = s2 * acc;
        }
        prev = std::move(cur);
    }
    return prev;
}

} // namespace driftlab
