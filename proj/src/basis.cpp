#include "driftlab/basis.hpp"

#include "driftlab/error.hpp"
#include "driftlab/hash.hpp"
#include "driftlab/wavelet_filters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace driftlab {

namespace {

// Gauss-Legendre nodes/weights on [0,1].
constexpr std::array<double, 4> kGaussNodes = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                               0.9305681557970263};
constexpr std::array<double, 4> kGaussWeights = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                                 0.1739274225687269};

void require_dim(int d)
{
    if (d < 1 || d > kMaxDim)
        throw ConfigError("dimension d must be in [1,3], got " + std::to_string(d));
}

// Periodic analysis of one line of length n (n >= 2, even).
void analyze_line(std::span<const double> h, std::vector<double>& line, std::vector<double>& scratch)
{
    const std::size_t n = line.size();
    const std::size_t half = n / 2;
    const std::size_t L = h.size();
    scratch.assign(n, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t m = 0; m < L; ++m) {
            const double c = line[(2 * k + m) % n];
            a += h[m] * c;
            const double g = (m % 2 == 0 ? 1.0 : -1.0) * h[L - 1 - m];
            d += g * c;
        }
        scratch[k] = a;
        scratch[half + k] = d;
    }
    line.swap(scratch);
}

void synthesize_line(std::span<const double> h, std::vector<double>& line, std::vector<double>& scratch)
{
    const std::size_t n = line.size();
    const std::size_t half = n / 2;
    const std::size_t L = h.size();
    scratch.assign(n, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        const double a = line[k];
        const double d = line[half + k];
        for (std::size_t m = 0; m < L; ++m) {
            const double g = (m % 2 == 0 ? 1.0 : -1.0) * h[L - 1 - m];
            scratch[(2 * k + m) % n] += h[m] * a + g * d;
        }
    }
    line.swap(scratch);
}

// Apply `op` to every axis-`axis` line of the corner block [0,n)^d of a row-major M^d array.
template <class Op>
void for_each_line(std::span<double> values, int d, std::size_t M, std::size_t n, int axis, Op&& op)
{
    std::size_t stride = 1;
    for (int k = axis + 1; k < d; ++k)
        stride *= M;
    std::vector<double> line(n);
    std::array<std::size_t, kMaxDim> idx{};
    const std::size_t lines = [&] {
        std::size_t c = 1;
        for (int k = 0; k < d - 1; ++k)
            c *= n;
        return c;
    }();
    for (std::size_t l = 0; l < lines; ++l) {
        // decode the line's multi-index over the other axes
        std::size_t rem = l;
        for (int k = d - 1; k >= 0; --k) {
            if (k == axis) {
                idx[k] = 0;
                continue;
            }
            idx[k] = rem % n;
            rem /= n;
        }
        std::size_t base = 0;
        for (int k = 0; k < d; ++k)
            base = base * M + idx[k];
        for (std::size_t i = 0; i < n; ++i)
            line[i] = values[base + i * stride];
        op(line);
        for (std::size_t i = 0; i < n; ++i)
            values[base + i * stride] = line[i];
    }
}

} // namespace

BasisSpec build_basis(Family family, int J, int d, int S, int cascade_depth)
{
    require_dim(d);
    if (J < 0)
        throw ConfigError("resolution level J must be >= 0, got " + std::to_string(J));
    if (static_cast<long long>(J) * d > 24)
        throw ConfigError("basis too large: 2^{Jd} with J*d = " + std::to_string(J * d));

    BasisSpec spec;
    spec.family_ = family;
    spec.level_ = J;
    spec.dim_ = d;
    auto table = std::make_shared<BasisSpec::Table>();
    if (family == Family::Haar) {
        spec.vanishing_moments_ = 1;
        spec.cascade_depth_ = 0;
        table->lowpass = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    } else {
        if (S < 2 || S > kMaxVanishingMoments)
            throw ConfigError("Daubechies basis needs 2 <= S <= 10, got S = " + std::to_string(S));
        if (cascade_depth < 4 || cascade_depth > 20)
            throw ConfigError("cascade depth must be in [4,20], got " + std::to_string(cascade_depth));
        spec.vanishing_moments_ = S;
        spec.cascade_depth_ = cascade_depth;
        table->lowpass = daubechies_lowpass(S);
        table->phi = cascade_scaling_function(table->lowpass, cascade_depth);
    }
    spec.table_ = std::move(table);
    return spec;
}

std::span<const double> BasisSpec::lowpass() const { return table_->lowpass; }

double BasisSpec::scaling_function(double t) const
{
    if (family_ == Family::Haar)
        return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0;
    const auto& phi = table_->phi;
    const double support = static_cast<double>(table_->lowpass.size() - 1);
    if (t <= 0.0 || t >= support)
        return 0.0;
    const double pos = std::ldexp(t, cascade_depth_);
    const double fl = std::floor(pos);
    const auto i = static_cast<std::size_t>(fl);
    if (i + 1 >= phi.size())
        return phi.back();
    const double frac = pos - fl;
    if (frac == 0.0)
        return phi[i];
    return phi[i] + frac * (phi[i + 1] - phi[i]);
}

double BasisSpec::scaling(int r, double x) const
{
    AxisActive act;
    axis_active(wrap_unit(x), act);
    for (int i = 0; i < act.count; ++i)
        if (act.index[i] == r)
            return act.value[i];
    return 0.0;
}

void BasisSpec::axis_active(double x, AxisActive& out) const
{
    const int M = per_axis();
    const double norm = std::sqrt(static_cast<double>(M));
    const double t = x * M;
    if (family_ == Family::Haar) {
        int r = static_cast<int>(std::floor(t));
        r = std::clamp(r, 0, M - 1);
        out.count = 1;
        out.index[0] = r;
        out.value[0] = norm;
        return;
    }
    const int L = static_cast<int>(table_->lowpass.size());
    const int top = static_cast<int>(std::floor(t));
    out.count = 0;
    for (int m = top - (L - 2); m <= top; ++m) {
        const double v = scaling_function(t - m);
        if (v == 0.0)
            continue;
        const int r = ((m % M) + M) % M;
        int slot = -1;
        for (int i = 0; i < out.count; ++i)
            if (out.index[i] == r) {
                slot = i;
                break;
            }
        if (slot < 0) {
            slot = out.count++;
            out.index[slot] = r;
            out.value[slot] = 0.0;
        }
        out.value[slot] += norm * v;
    }
}

void BasisSpec::active(const Point& x, ActiveSet& out) const
{
    out.index.clear();
    out.value.clear();
    for_each_active(x, [&](std::size_t i, double v) {
        out.index.push_back(i);
        out.value.push_back(v);
    });
}

std::uint64_t BasisSpec::hash() const
{
    Fnv1a h;
    h.update("basis");
    h.update_value(static_cast<std::uint8_t>(family_));
    h.update_value(static_cast<std::int32_t>(vanishing_moments_));
    h.update_value(static_cast<std::int32_t>(level_));
    h.update_value(static_cast<std::int32_t>(dim_));
    h.update_value(static_cast<std::int32_t>(cascade_depth_));
    return h.digest();
}

std::string BasisSpec::describe() const
{
    std::ostringstream os;
    if (family_ == Family::Haar)
        os << "haar";
    else
        os << "daubechies S=" << vanishing_moments_;
    os << " J=" << level_ << " d=" << dim_ << " v_J=" << size();
    return os.str();
}

int coefficient_level(const BasisSpec& spec, std::size_t flat_index)
{
    const std::size_t M = static_cast<std::size_t>(spec.per_axis());
    std::size_t largest = 0;
    for (int k = 0; k < spec.dim(); ++k) {
        largest = std::max(largest, flat_index % M);
        flat_index /= M;
    }
    if (largest == 0)
        return -1;
    int l = 0;
    while ((std::size_t{2} << l) <= largest)
        ++l;
    return l;
}

// ---------------------------------------------------------------------------

CoefficientField::CoefficientField(BasisSpec spec, Coords coords, int components)
    : spec_(std::move(spec)), coords_(coords)
{
    if (components < 1 || components > kMaxDim)
        throw ShapeError("coefficient field needs 1..3 components, got " + std::to_string(components));
    values_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec_.size()), components);
}

CoefficientField::CoefficientField(BasisSpec spec, Coords coords, Eigen::MatrixXd values)
    : spec_(std::move(spec)), coords_(coords), values_(std::move(values))
{
    if (static_cast<std::size_t>(values_.rows()) != spec_.size())
        throw ShapeError("coefficient block length " + std::to_string(values_.rows()) + " != v_J = " +
                         std::to_string(spec_.size()));
    if (values_.cols() < 1 || values_.cols() > kMaxDim)
        throw ShapeError("coefficient field needs 1..3 components");
}

void forward_transform(const BasisSpec& spec, std::span<double> values)
{
    if (values.size() != spec.size())
        throw ShapeError("transform: block length does not match v_J");
    const std::size_t M = static_cast<std::size_t>(spec.per_axis());
    const auto h = spec.lowpass();
    std::vector<double> scratch;
    for (std::size_t n = M; n >= 2; n /= 2)
        for (int axis = 0; axis < spec.dim(); ++axis)
            for_each_line(values, spec.dim(), M, n, axis,
                          [&](std::vector<double>& line) { analyze_line(h, line, scratch); });
}

void inverse_transform(const BasisSpec& spec, std::span<double> values)
{
    if (values.size() != spec.size())
        throw ShapeError("transform: block length does not match v_J");
    const std::size_t M = static_cast<std::size_t>(spec.per_axis());
    const auto h = spec.lowpass();
    std::vector<double> scratch;
    for (std::size_t n = 2; n <= M; n *= 2)
        for (int axis = spec.dim() - 1; axis >= 0; --axis)
            for_each_line(values, spec.dim(), M, n, axis,
                          [&](std::vector<double>& line) { synthesize_line(h, line, scratch); });
}

CoefficientField transform(const CoefficientField& c, Direction direction)
{
    const Coords from = direction == Direction::ToMultiresolution ? Coords::ScalingLevelJ : Coords::Multiresolution;
    const Coords to = direction == Direction::ToMultiresolution ? Coords::Multiresolution : Coords::ScalingLevelJ;
    if (c.coords() != from)
        throw ShapeError("transform: field is not in the direction's source coordinates");
    Eigen::MatrixXd v = c.values();
    for (int j = 0; j < v.cols(); ++j) {
        std::span<double> col(v.col(j).data(), static_cast<std::size_t>(v.rows()));
        if (direction == Direction::ToMultiresolution)
            forward_transform(c.spec(), col);
        else
            inverse_transform(c.spec(), col);
    }
    return CoefficientField(c.spec(), to, std::move(v));
}

CoefficientField to_coords(const CoefficientField& c, Coords coords)
{
    if (c.coords() == coords)
        return c;
    return transform(c, coords == Coords::Multiresolution ? Direction::ToMultiresolution : Direction::ToScaling);
}

// ---------------------------------------------------------------------------

FieldEvaluator::FieldEvaluator(const CoefficientField& c)
    : spec_(c.spec()), scaling_(to_coords(c, Coords::ScalingLevelJ).values())
{
}

Point FieldEvaluator::operator()(const Point& x) const
{
    const Point y = wrap_point(x, spec_.dim());
    Point out{0.0, 0.0, 0.0};
    const int nc = components();
    spec_.for_each_active(y, [&](std::size_t i, double v) {
        for (int j = 0; j < nc; ++j)
            out[j] += v * scaling_(static_cast<Eigen::Index>(i), j);
    });
    return out;
}

double FieldEvaluator::component(const Point& x, int j) const
{
    const Point y = wrap_point(x, spec_.dim());
    double out = 0.0;
    spec_.for_each_active(y, [&](std::size_t i, double v) { out += v * scaling_(static_cast<Eigen::Index>(i), j); });
    return out;
}

VectorField FieldEvaluator::as_vector_field() const
{
    auto self = std::make_shared<const FieldEvaluator>(*this);
    return VectorField{spec_.dim(), [self](const Point& x) { return (*self)(x); }};
}

ScalarField FieldEvaluator::as_scalar_field(int j) const
{
    auto self = std::make_shared<const FieldEvaluator>(*this);
    return ScalarField{spec_.dim(), [self, j](const Point& x) { return self->component(x, j); }};
}

Point synthesize(const CoefficientField& c, const Point& x, int x_dim)
{
    if (x_dim != c.spec().dim())
        throw ShapeError("synthesize: point has " + std::to_string(x_dim) + " coordinates, basis has d = " +
                         std::to_string(c.spec().dim()));
    return FieldEvaluator(c)(x);
}

// ---------------------------------------------------------------------------

int default_quadrature_depth(const BasisSpec& spec)
{
    if (spec.family() == Family::Haar)
        return spec.dim() == 1 ? 6 : (spec.dim() == 2 ? 5 : 3);
    const int want = spec.dim() == 1 ? 12 : (spec.dim() == 2 ? 6 : 3);
    return std::min(want, spec.cascade_depth());
}

AxisQuadrature axis_quadrature(const BasisSpec& spec, int depth)
{
    if (depth < 0)
        depth = default_quadrature_depth(spec);
    AxisQuadrature q;
    if (spec.family() == Family::Haar) {
        const std::size_t cells = std::size_t{1} << (spec.level() + depth);
        const double hcell = 1.0 / static_cast<double>(cells);
        q.nodes.reserve(cells * kGaussNodes.size());
        for (std::size_t c = 0; c < cells; ++c)
            for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
                q.nodes.push_back((static_cast<double>(c) + kGaussNodes[g]) * hcell);
                q.weights.push_back(kGaussWeights[g] * hcell);
            }
    } else {
        depth = std::min(depth, spec.cascade_depth());
        const std::size_t n = std::size_t{1} << (spec.level() + depth);
        const double hstep = 1.0 / static_cast<double>(n);
        q.nodes.resize(n);
        q.weights.assign(n, hstep);
        for (std::size_t i = 0; i < n; ++i)
            q.nodes[i] = static_cast<double>(i) * hstep;
    }
    return q;
}

namespace {

// Visit every node of the d-fold tensor grid: f(flat node index, point, weight).
template <class F>
void for_each_tensor_node(const AxisQuadrature& q, int d, F&& f)
{
    const std::size_t n = q.nodes.size();
    std::size_t total = 1;
    for (int k = 0; k < d; ++k)
        total *= n;
    std::array<std::size_t, kMaxDim> idx{};
    Point x{0.0, 0.0, 0.0};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double w = 1.0;
        for (int k = d - 1; k >= 0; --k) {
            idx[k] = rem % n;
            rem /= n;
            x[k] = q.nodes[idx[k]];
            w *= q.weights[idx[k]];
        }
        f(flat, x, w);
    }
}

template <class Eval>
CoefficientField project_impl(const BasisSpec& spec, int components, Eval&& eval, Coords coords, int depth)
{
    const AxisQuadrature q = axis_quadrature(spec, depth);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.size()), components);
    std::array<double, kMaxDim> fx{};
    for_each_tensor_node(q, spec.dim(), [&](std::size_t, const Point& x, double w) {
        eval(x, fx);
        spec.for_each_active(x, [&](std::size_t i, double v) {
            for (int j = 0; j < components; ++j)
                acc(static_cast<Eigen::Index>(i), j) += w * v * fx[j];
        });
    });
    CoefficientField out(spec, Coords::ScalingLevelJ, std::move(acc));
    return to_coords(out, coords);
}

} // namespace

CoefficientField project(const BasisSpec& spec, const ScalarField& f, Coords coords, int depth)
{
    if (f.dim != spec.dim())
        throw ShapeError("project: field dimension does not match basis");
    return project_impl(
        spec, 1, [&](const Point& x, std::array<double, kMaxDim>& out) { out[0] = f(x); }, coords, depth);
}

CoefficientField project(const BasisSpec& spec, const VectorField& f, Coords coords, int depth)
{
    if (f.dim != spec.dim())
        throw ShapeError("project: field dimension does not match basis");
    return project_impl(
        spec, spec.dim(),
        [&](const Point& x, std::array<double, kMaxDim>& out) {
            const Point v = f(x);
            out = v;
        },
        coords, depth);
}

Eigen::MatrixXd quadrature_gram(const BasisSpec& spec, const AxisQuadrature& quad,
                                std::span<const double> weight_at_nodes)
{
    const auto vj = static_cast<Eigen::Index>(spec.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(vj, vj);
    std::size_t total = 1;
    for (int k = 0; k < spec.dim(); ++k)
        total *= quad.nodes.size();
    if (!weight_at_nodes.empty() && weight_at_nodes.size() != total)
        throw ShapeError("quadrature_gram: weight array does not match the quadrature grid");
    ActiveSet act;
    for_each_tensor_node(quad, spec.dim(), [&](std::size_t flat, const Point& x, double w) {
        if (!weight_at_nodes.empty())
            w *= weight_at_nodes[flat];
        spec.active(x, act);
        for (std::size_t a = 0; a < act.size(); ++a) {
            const double va = w * act.value[a];
            for (std::size_t b = 0; b < act.size(); ++b)
                gram(static_cast<Eigen::Index>(act.index[a]), static_cast<Eigen::Index>(act.index[b])) +=
                    va * act.value[b];
        }
    });
    return gram;
}

// ---------------------------------------------------------------------------

PriorSpec PriorSpec::from_horizon(double alpha, double a, double T, int d)
{
    if (!(T > 1.0))
        throw ConfigError("horizon T must exceed 1 to derive J, got " + std::to_string(T));
    PriorSpec p;
    p.alpha = alpha;
    p.a = a;
    p.dim = d;
    p.level = std::max(0, static_cast<int>(std::lround(std::log2(T) / (2.0 * a + d))));
    p.validate();
    return p;
}

void PriorSpec::validate() const
{
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("prior alpha must be >= 0, got " + std::to_string(alpha));
    if (!(a > 0.0) || !std::isfinite(a))
        throw ConfigError("prior a must be > 0, got " + std::to_string(a));
    if (level < 0)
        throw ConfigError("prior level J must be >= 0");
    require_dim(dim);
}

double prior_sigma(const PriorSpec& prior, int l)
{
    if (!(prior.alpha >= 0.0))
        throw ConfigError("prior alpha must be >= 0, got " + std::to_string(prior.alpha));
    const int lev = std::max(l, 0);
    return std::exp2(-lev * (prior.alpha + 0.5 * prior.dim));
}

Eigen::VectorXd prior_precision_diagonal(const BasisSpec& spec, const PriorSpec& prior)
{
    if (prior.level != spec.level() || prior.dim != spec.dim())
        throw ShapeError("prior (J, d) does not match the basis");
    Eigen::VectorXd diag(static_cast<Eigen::Index>(spec.size()));
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double s = prior_sigma(prior, coefficient_level(spec, i));
        diag(static_cast<Eigen::Index>(i)) = 1.0 / (s * s);
    }
    return diag;
}

double rkhs_inner(const CoefficientField& c1, const CoefficientField& c2, const PriorSpec& prior)
{
    if (!(c1.spec() == c2.spec()) || c1.components() != c2.components())
        throw ShapeError("rkhs_inner: fields live on different bases");
    if (c1.coords() != Coords::Multiresolution || c2.coords() != Coords::Multiresolution)
        throw ShapeError("rkhs_inner: fields must be in multiresolution coordinates");
    const Eigen::VectorXd w = prior_precision_diagonal(c1.spec(), prior);
    double acc = 0.0;
    for (int j = 0; j < c1.components(); ++j)
        acc += (w.array() * c1.values().col(j).array() * c2.values().col(j).array()).sum();
    return acc;
}

double sobolev_norm(const CoefficientField& c, double s)
{
    if (c.coords() != Coords::Multiresolution)
        throw ShapeError("sobolev_norm: field must be in multiresolution coordinates");
    double acc = 0.0;
    for (std::size_t i = 0; i < c.spec().size(); ++i) {
        const int l = std::max(coefficient_level(c.spec(), i), 0);
        const double w = std::exp2(2.0 * l * s);
        acc += w * c.values().row(static_cast<Eigen::Index>(i)).squaredNorm();
    }
    return std::sqrt(acc);
}

} // namespace driftlab
