#include "driftlab/fourier.hpp"

#include "driftlab/error.hpp"
#include "driftlab/hash.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace driftlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_dim(int d)
{
    if (d < 1 || d > kMaxDim)
        throw ConfigError("field dimension must be 1..3, got " + std::to_string(d));
}

std::size_t ipow(std::size_t b, int e)
{
    std::size_t r = 1;
    for (int i = 0; i < e; ++i)
        r *= b;
    return r;
}

/// Planner calls are not thread-safe in FFTW; plans are cached and executed with
/// the new-array interface, which is.
fftw_plan get_plan(int dim, int n, int sign)
{
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mutex);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;
    std::vector<int> dims(static_cast<std::size_t>(dim), n);
    std::vector<cplx> buf(ipow(static_cast<std::size_t>(n), dim));
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft(dim, dims.data(), p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan)
        throw NumericalError("FFTW could not create a plan");
    cache.emplace(key, plan);
    return plan;
}

} // namespace

void fft(std::vector<cplx>& data, int dim, int n, int sign)
{
    require_dim(dim);
    if (n < 1 || data.size() != ipow(static_cast<std::size_t>(n), dim))
        throw ShapeError("FFT buffer size does not match the grid");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(get_plan(dim, n, sign), p, p);
}

FourierField::FourierField(int dim, int K) : dim_(dim), K_(K)
{
    require_dim(dim);
    if (K < 0)
        throw ConfigError("Fourier truncation K must be non-negative");
    coeffs_.assign(ipow(static_cast<std::size_t>(2 * K + 1), dim), cplx{0.0, 0.0});
}

FourierField::FourierField(int dim, int K, std::vector<cplx> coeffs) : FourierField(dim, K)
{
    if (coeffs.size() != coeffs_.size())
        throw ShapeError("Fourier coefficient array has " + std::to_string(coeffs.size()) + " entries, expected " +
                         std::to_string(coeffs_.size()));
    coeffs_ = std::move(coeffs);
}

FourierField FourierField::constant(int dim, int K, double c)
{
    FourierField f(dim, K);
    f.coeffs_[f.zero_index()] = c;
    return f;
}

std::size_t FourierField::index(const ModeIndex& k) const
{
    const std::size_t m = static_cast<std::size_t>(modes_per_axis());
    std::size_t flat = 0;
    for (int j = 0; j < dim_; ++j) {
        if (k[j] < -K_ || k[j] > K_)
            throw ShapeError("mode index outside the truncation");
        flat = flat * m + static_cast<std::size_t>(k[j] + K_);
    }
    return flat;
}

ModeIndex FourierField::mode(std::size_t flat) const
{
    const std::size_t m = static_cast<std::size_t>(modes_per_axis());
    ModeIndex k{0, 0, 0};
    for (int j = dim_ - 1; j >= 0; --j) {
        k[j] = static_cast<int>(flat % m) - K_;
        flat /= m;
    }
    return k;
}

FourierField FourierField::from_function(const ScalarField& f, int K, int oversample)
{
    const int d = f.dim;
    require_dim(d);
    if (oversample < 1)
        throw ConfigError("oversample must be at least 1");
    const int n = std::max(2 * oversample * K, 2 * K + 1);
    const std::size_t total = ipow(static_cast<std::size_t>(n), d);
    std::vector<double> vals(total);
    for (std::size_t g = 0; g < total; ++g) {
        Point x{0, 0, 0};
        std::size_t rest = g;
        for (int j = d - 1; j >= 0; --j) {
            x[j] = static_cast<double>(rest % static_cast<std::size_t>(n)) / n;
            rest /= static_cast<std::size_t>(n);
        }
        vals[g] = f(x);
    }
    return from_grid(d, n, vals, K);
}

FourierField FourierField::from_grid(int dim, int n, std::span<const double> values, int K)
{
    require_dim(dim);
    if (n <= 2 * K)
        throw ConfigError("grid of " + std::to_string(n) + " points cannot resolve " + std::to_string(K) + " modes");
    const std::size_t total = ipow(static_cast<std::size_t>(n), dim);
    if (values.size() != total)
        throw ShapeError("grid value count does not match n^d");
    std::vector<cplx> buf(values.begin(), values.end());
    fft(buf, dim, n, -1);
    FourierField out(dim, K);
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const ModeIndex k = out.mode(i);
        std::size_t g = 0;
        for (int j = 0; j < dim; ++j)
            g = g * static_cast<std::size_t>(n) + static_cast<std::size_t>((k[j] + n) % n);
        out.coeffs_[i] = buf[g] * scale;
    }
    out.symmetrize();
    return out;
}

FourierField FourierField::box_indicator(int dim, int K, const Point& lo, const Point& hi)
{
    require_dim(dim);
    for (int j = 0; j < dim; ++j)
        if (!(0.0 <= lo[j] && lo[j] < hi[j] && hi[j] <= 1.0))
            throw ConfigError("box bounds must satisfy 0 <= lo < hi <= 1");
    // one axis: int_lo^hi e^{-2 pi i k x} dx
    std::array<std::vector<cplx>, kMaxDim> axis;
    for (int j = 0; j < dim; ++j) {
        axis[j].resize(static_cast<std::size_t>(2 * K + 1));
        for (int k = -K; k <= K; ++k) {
            cplx v;
            if (k == 0) {
                v = hi[j] - lo[j];
            } else {
                const double w = kTwoPi * k;
                v = (std::polar(1.0, -w * lo[j]) - std::polar(1.0, -w * hi[j])) / cplx(0.0, w);
            }
            axis[j][static_cast<std::size_t>(k + K)] = v;
        }
    }
    FourierField out(dim, K);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const ModeIndex k = out.mode(i);
        cplx v = 1.0;
        for (int j = 0; j < dim; ++j)
            v *= axis[j][static_cast<std::size_t>(k[j] + K)];
        out.coeffs_[i] = v;
    }
    return out;
}

double FourierField::evaluate(const Point& x) const
{
    const int m = modes_per_axis();
    std::array<std::vector<cplx>, kMaxDim> e;
    for (int j = 0; j < dim_; ++j) {
        e[j].resize(static_cast<std::size_t>(m));
        for (int k = -K_; k <= K_; ++k)
            e[j][static_cast<std::size_t>(k + K_)] = std::polar(1.0, kTwoPi * k * x[j]);
    }
    cplx acc = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const ModeIndex k = mode(i);
        cplx v = coeffs_[i];
        for (int j = 0; j < dim_; ++j)
            v *= e[j][static_cast<std::size_t>(k[j] + K_)];
        acc += v;
    }
    return acc.real();
}

std::vector<double> FourierField::grid_values(int n) const
{
    if (n < 1)
        throw ConfigError("grid size must be positive");
    const std::size_t total = ipow(static_cast<std::size_t>(n), dim_);
    std::vector<cplx> buf(total, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const ModeIndex k = mode(i);
        std::size_t g = 0;
        for (int j = 0; j < dim_; ++j)
            g = g * static_cast<std::size_t>(n) + static_cast<std::size_t>(((k[j] % n) + n) % n);
        buf[g] += coeffs_[i];
    }
    fft(buf, dim_, n, +1);
    std::vector<double> out(total);
    for (std::size_t g = 0; g < total; ++g)
        out[g] = buf[g].real();
    return out;
}

std::vector<double> FourierField::tensor_values(std::span<const double> nodes) const
{
    // contract one axis at a time: coefficients (m^d) -> values (n^d)
    const std::size_t n = nodes.size();
    const std::size_t m = static_cast<std::size_t>(modes_per_axis());
    std::vector<cplx> E(n * m);
    for (std::size_t g = 0; g < n; ++g)
        for (int k = -K_; k <= K_; ++k)
            E[g * m + static_cast<std::size_t>(k + K_)] = std::polar(1.0, kTwoPi * k * nodes[g]);

    std::vector<cplx> cur(coeffs_.begin(), coeffs_.end());
    // shape: [n]^a x [m]^{d-a}, contracting axis a (which has extent m)
    for (int a = 0; a < dim_; ++a) {
        const std::size_t outer = ipow(n, a);
        const std::size_t inner = ipow(m, dim_ - a - 1);
        std::vector<cplx> next(outer * n * inner, cplx{0.0, 0.0});
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t g = 0; g < n; ++g)
                for (std::size_t k = 0; k < m; ++k) {
                    const cplx w = E[g * m + k];
                    const cplx* src = &cur[(o * m + k) * inner];
                    cplx* dst = &next[(o * n + g) * inner];
                    for (std::size_t r = 0; r < inner; ++r)
                        dst[r] += w * src[r];
                }
        cur = std::move(next);
    }
    std::vector<double> out(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i)
        out[i] = cur[i].real();
    return out;
}

ScalarField FourierField::as_scalar_field() const
{
    auto self = std::make_shared<FourierField>(*this);
    return ScalarField{dim_, [self](const Point& x) { return self->evaluate(x); }};
}

FourierField FourierField::derivative(int axis) const
{
    if (axis < 0 || axis >= dim_)
        throw ShapeError("derivative axis out of range");
    FourierField out(*this);
    for (std::size_t i = 0; i < size(); ++i)
        out.coeffs_[i] *= cplx(0.0, kTwoPi * mode(i)[axis]);
    return out;
}

FourierField FourierField::laplacian() const
{
    FourierField out(*this);
    for (std::size_t i = 0; i < size(); ++i) {
        const ModeIndex k = mode(i);
        double k2 = 0.0;
        for (int j = 0; j < dim_; ++j)
            k2 += static_cast<double>(k[j]) * k[j];
        out.coeffs_[i] *= -kTwoPi * kTwoPi * k2;
    }
    return out;
}

FourierField FourierField::resized(int K) const
{
    FourierField out(dim_, K);
    const int common = std::min(K, K_);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const ModeIndex k = out.mode(i);
        bool inside = true;
        for (int j = 0; j < dim_; ++j)
            inside = inside && std::abs(k[j]) <= common;
        if (inside)
            out.coeffs_[i] = (*this)[k];
    }
    return out;
}

double FourierField::l2_norm() const
{
    double acc = 0.0;
    for (const cplx& c : coeffs_)
        acc += std::norm(c);
    return std::sqrt(acc);
}

double FourierField::inner(const FourierField& other) const
{
    if (other.dim_ != dim_)
        throw ShapeError("inner product of fields with different dimensions");
    const FourierField* small = K_ <= other.K_ ? this : &other;
    const FourierField* large = K_ <= other.K_ ? &other : this;
    cplx acc = 0.0;
    for (std::size_t i = 0; i < small->size(); ++i) {
        const cplx a = small->coeffs_[i];
        const cplx b = (*large)[small->mode(i)];
        acc += small == this ? a * std::conj(b) : b * std::conj(a);
    }
    return acc.real();
}

double FourierField::symmetry_error() const
{
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        ModeIndex k = mode(i);
        for (int j = 0; j < dim_; ++j)
            k[j] = -k[j];
        worst = std::max(worst, std::abs((*this)[k] - std::conj(coeffs_[i])));
    }
    return worst;
}

void FourierField::symmetrize()
{
    std::vector<cplx> out(coeffs_.size());
    for (std::size_t i = 0; i < size(); ++i) {
        ModeIndex k = mode(i);
        for (int j = 0; j < dim_; ++j)
            k[j] = -k[j];
        out[i] = 0.5 * (coeffs_[i] + std::conj((*this)[k]));
    }
    coeffs_ = std::move(out);
}

void FourierField::require_compatible(const FourierField& o) const
{
    if (o.dim_ != dim_ || o.K_ != K_)
        throw ShapeError("Fourier fields differ in dimension or truncation");
}

FourierField& FourierField::operator+=(const FourierField& o)
{
    require_compatible(o);
    for (std::size_t i = 0; i < size(); ++i)
        coeffs_[i] += o.coeffs_[i];
    return *this;
}

FourierField& FourierField::operator-=(const FourierField& o)
{
    require_compatible(o);
    for (std::size_t i = 0; i < size(); ++i)
        coeffs_[i] -= o.coeffs_[i];
    return *this;
}

FourierField& FourierField::operator*=(double s)
{
    for (cplx& c : coeffs_)
        c *= s;
    return *this;
}

std::uint64_t FourierField::hash() const
{
    Fnv1a h;
    h.update("fourier");
    h.update_value(dim_);
    h.update_value(K_);
    h.update(coeffs_.data(), coeffs_.size() * sizeof(cplx));
    return h.digest();
}

} // namespace driftlab
