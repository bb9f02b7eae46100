#pragma once

// Truncated Fourier series u(x) = sum_{|k_j| <= K} c_k e^{2 pi i k.x} on T^d.
//
// Coefficients are stored row-major over the multi-index (k_0 + K, ..., k_{d-1} + K).
// Grid values live on {g/n}^d, row-major, and are converted with FFTW.

#include "driftlab/types.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace driftlab {

using cplx = std::complex<double>;
using ModeIndex = std::array<int, kMaxDim>;

/// In-place unnormalised d-dimensional DFT of an n^d row-major array.
/// sign = -1 computes sum_g a_g e^{-2 pi i k.g/n}, sign = +1 the inverse sum.
void fft(std::vector<cplx>& data, int dim, int n, int sign);

class FourierField {
public:
    FourierField(int dim, int K);
    FourierField(int dim, int K, std::vector<cplx> coeffs);

    static FourierField constant(int dim, int K, double c);
    /// Samples f on an n^d grid with n = 2 oversample K (at least 2K+1) and keeps |k_j| <= K.
    static FourierField from_function(const ScalarField& f, int K, int oversample = 3);
    /// Modes |k_j| <= K of the trigonometric interpolant of grid values (n > 2K).
    static FourierField from_grid(int dim, int n, std::span<const double> values, int K);
    /// Exact coefficients of the indicator of the box prod [lo_j, hi_j), 0 <= lo_j < hi_j <= 1.
    static FourierField box_indicator(int dim, int K, const Point& lo, const Point& hi);

    int dim() const { return dim_; }
    int K() const { return K_; }
    int modes_per_axis() const { return 2 * K_ + 1; }
    std::size_t size() const { return coeffs_.size(); }

    std::size_t index(const ModeIndex& k) const;
    ModeIndex mode(std::size_t flat) const;
    std::size_t zero_index() const { return index(ModeIndex{0, 0, 0}); }

    std::span<const cplx> coeffs() const { return coeffs_; }
    std::span<cplx> coeffs() { return coeffs_; }
    cplx operator[](const ModeIndex& k) const { return coeffs_[index(k)]; }
    cplx& operator[](const ModeIndex& k) { return coeffs_[index(k)]; }

    /// Lebesgue mean c_0 (real part).
    double mean() const { return coeffs_[zero_index()].real(); }

    double evaluate(const Point& x) const;
    /// Real values on the n^d grid (any n >= 1; modes are folded mod n).
    std::vector<double> grid_values(int n) const;
    /// Real values on a tensor grid with the same 1-d nodes on every axis, row-major.
    std::vector<double> tensor_values(std::span<const double> nodes) const;
    ScalarField as_scalar_field() const;

    FourierField derivative(int axis) const;
    FourierField laplacian() const;
    /// Same field with truncation K (zero-padded or cut).
    FourierField resized(int K) const;

    /// L^2 norm by Parseval.
    double l2_norm() const;
    /// Re sum_k a_k conj(b_k) = int a b dx for real fields; common modes only.
    double inner(const FourierField& other) const;

    /// max |c_{-k} - conj(c_k)|.
    double symmetry_error() const;
    /// Replace c_k by (c_k + conj(c_{-k}))/2.
    void symmetrize();

    FourierField& operator+=(const FourierField& o);
    FourierField& operator-=(const FourierField& o);
    FourierField& operator*=(double s);

    std::uint64_t hash() const;

private:
    void require_compatible(const FourierField& o) const;

    int dim_;
    int K_;
    std::vector<cplx> coeffs_;
};

inline FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
inline FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
inline FourierField operator*(double s, FourierField a) { return a *= s; }

} // namespace driftlab
