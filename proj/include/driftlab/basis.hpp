#pragma once

// Periodised tensor-product wavelet basis of L^2(T^d) truncated at level J.
//
// Two coordinate systems describe an element of V_J:
//   * ScalingLevelJ   -- coefficients on Phi_{J,r}(x) = prod_k Phi_{J,r_k}(x_k),
//                        r in {0..2^J-1}^d, flattened row-major. Local supports,
//                        used for evaluation and Gram assembly.
//   * Multiresolution -- father function (constant 1) plus tensor wavelets of
//                        levels 0..J-1 in the Mallat corner layout: a multi-index
//                        with largest component m >= 1 belongs to level floor(log2 m).
// The orthogonal periodic fast wavelet transform maps between the two.

#include "driftlab/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace driftlab {

enum class Family : std::uint8_t { Haar = 0, Daubechies = 1 };

enum class Coords : std::uint8_t { ScalingLevelJ = 0, Multiresolution = 1 };

enum class Direction { ToMultiresolution, ToScaling };

inline constexpr int kMaxVanishingMoments = 10;
inline constexpr int kMaxAxisActive = 2 * kMaxVanishingMoments - 1;
inline constexpr int kDefaultCascadeDepth = 12;

/// Level-J scaling functions that are nonzero at one coordinate.
struct AxisActive {
    int count = 0;
    std::array<int, kMaxAxisActive> index{};
    std::array<double, kMaxAxisActive> value{};
};

/// Flattened indices and values of all tensor basis functions active at a point.
struct ActiveSet {
    std::vector<std::size_t> index;
    std::vector<double> value;
    std::size_t size() const { return index.size(); }
};

class BasisSpec {
public:
    Family family() const { return family_; }
    /// S for Daubechies, 1 for Haar.
    int vanishing_moments() const { return vanishing_moments_; }
    int level() const { return level_; }
    int dim() const { return dim_; }
    int per_axis() const { return 1 << level_; }
    /// v_J = 2^{Jd}.
    std::size_t size() const { return std::size_t{1} << (level_ * dim_); }
    /// Dyadic depth q of the scaling-function table (values at t = i / 2^q).
    int cascade_depth() const { return cascade_depth_; }

    std::span<const double> lowpass() const;

    /// Mother scaling function phi(t), t real; zero outside its support.
    double scaling_function(double t) const;

    /// Phi_{J,r}(x) for one axis; x is wrapped first.
    double scaling(int r, double x) const;

    /// Level-J scaling functions nonzero at x (x in [0,1)); duplicates merged.
    void axis_active(double x, AxisActive& out) const;

    /// Tensor basis functions nonzero at a wrapped point.
    void active(const Point& x, ActiveSet& out) const;

    /// Visit every active (flat index, value) pair at a wrapped point without allocating.
    template <class F>
    void for_each_active(const Point& x, F&& f) const;

    std::uint64_t hash() const;
    std::string describe() const;

    bool operator==(const BasisSpec& other) const
    {
        return family_ == other.family_ && vanishing_moments_ == other.vanishing_moments_ &&
               level_ == other.level_ && dim_ == other.dim_ && cascade_depth_ == other.cascade_depth_;
    }

private:
    friend BasisSpec build_basis(Family, int, int, int, int);

    struct Table {
        std::vector<double> lowpass;
        std::vector<double> phi; // phi(i / 2^depth)
    };

    Family family_ = Family::Haar;
    int vanishing_moments_ = 1;
    int level_ = 0;
    int dim_ = 1;
    int cascade_depth_ = 0;
    std::shared_ptr<const Table> table_;
};

/// Construct the basis. Haar ignores S; Daubechies needs 2 <= S <= 10.
BasisSpec build_basis(Family family, int J, int d, int S = 0, int cascade_depth = kDefaultCascadeDepth);

/// Multiresolution level of a flat coefficient index; -1 for the father function.
int coefficient_level(const BasisSpec& spec, std::size_t flat_index);

/// Element of V_J (components = 1) or of V_J^{otimes d} (components = d).
class CoefficientField {
public:
    CoefficientField(BasisSpec spec, Coords coords, int components);
    /// values: v_J x components, column j is component j.
    CoefficientField(BasisSpec spec, Coords coords, Eigen::MatrixXd values);

    const BasisSpec& spec() const { return spec_; }
    Coords coords() const { return coords_; }
    int components() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::MatrixXd& values() { return values_; }
    auto component(int j) const { return values_.col(j); }

private:
    BasisSpec spec_;
    Coords coords_;
    Eigen::MatrixXd values_;
};

/// Orthogonal fast wavelet transform between the two coordinate systems.
CoefficientField transform(const CoefficientField& c, Direction direction);

/// Same field in the requested coordinates (no-op when already there).
CoefficientField to_coords(const CoefficientField& c, Coords coords);

/// In-place transforms of one coefficient block (length v_J).
void forward_transform(const BasisSpec& spec, std::span<double> values);
void inverse_transform(const BasisSpec& spec, std::span<double> values);

/// Evaluation of a coefficient field; keeps scaling coordinates for repeated use.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const CoefficientField& c);

    /// Component values at x (x reduced mod 1); entries past components() are 0.
    Point operator()(const Point& x) const;
    double component(const Point& x, int j) const;

    int components() const { return static_cast<int>(scaling_.cols()); }
    const BasisSpec& spec() const { return spec_; }

    VectorField as_vector_field() const;
    ScalarField as_scalar_field(int j = 0) const;

private:
    BasisSpec spec_;
    Eigen::MatrixXd scaling_;
};

/// Sum of coefficients times basis values at x. Throws ShapeError if x_dim != spec.dim().
Point synthesize(const CoefficientField& c, const Point& x, int x_dim);
inline Point synthesize(const CoefficientField& c, const Point& x) { return synthesize(c, x, c.spec().dim()); }

/// One-dimensional quadrature rule on [0,1) adapted to the basis.
///   Haar:       composite 4-point Gauss-Legendre on 2^{J+depth} cells.
///   Daubechies: periodic rectangle rule on the dyadic nodes i / 2^{J+depth}, depth
///               capped at the cascade depth so basis values there are exact.
struct AxisQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};

int default_quadrature_depth(const BasisSpec& spec);
AxisQuadrature axis_quadrature(const BasisSpec& spec, int depth);

/// Project a field onto V_J by tensor quadrature.
CoefficientField project(const BasisSpec& spec, const ScalarField& f, Coords coords = Coords::Multiresolution,
                         int depth = -1);
CoefficientField project(const BasisSpec& spec, const VectorField& f, Coords coords = Coords::Multiresolution,
                         int depth = -1);

/// Gram matrix int Phi_r Phi_s w in ScalingLevelJ coordinates. `weight_at_nodes`
/// holds w on the tensor grid of `quad` (row-major), or is empty for w = 1.
Eigen::MatrixXd quadrature_gram(const BasisSpec& spec, const AxisQuadrature& quad,
                                std::span<const double> weight_at_nodes);

/// Gaussian prior hyper-parameters: sigma_l = 2^{-l(alpha + d/2)}.
struct PriorSpec {
    double alpha = 0.0;
    double a = 1.0;
    int level = 0;
    int dim = 1;

    /// J = round(log2(T) / (2a + d)), floored at 0.
    static PriorSpec from_horizon(double alpha, double a, double T, int d);
    void validate() const;
};

/// sigma_l; the father function (level -1) uses l = 0.
double prior_sigma(const PriorSpec& prior, int l);

/// Diagonal of the prior precision D = diag(sigma_{l(i)}^{-2}) in multiresolution order.
Eigen::VectorXd prior_precision_diagonal(const BasisSpec& spec, const PriorSpec& prior);

/// RKHS inner product sum_j sum_i sigma_{l(i)}^{-2} c1_{ij} c2_{ij}.
double rkhs_inner(const CoefficientField& c1, const CoefficientField& c2, const PriorSpec& prior);

/// (sum 2^{2ls} c^2)^{1/2} over multiresolution coefficients; father uses l = 0.
double sobolev_norm(const CoefficientField& c, double s);

// ---------------------------------------------------------------------------

template <class F>
void BasisSpec::for_each_active(const Point& x, F&& f) const
{
    std::array<AxisActive, kMaxDim> ax;
    for (int k = 0; k < dim_; ++k)
        axis_active(x[k], ax[k]);
    const std::size_t M = static_cast<std::size_t>(per_axis());
    if (dim_ == 1) {
        for (int a = 0; a < ax[0].count; ++a)
            f(static_cast<std::size_t>(ax[0].index[a]), ax[0].value[a]);
    } else if (dim_ == 2) {
        for (int a = 0; a < ax[0].count; ++a)
            for (int b = 0; b < ax[1].count; ++b)
                f(static_cast<std::size_t>(ax[0].index[a]) * M + static_cast<std::size_t>(ax[1].index[b]),
                  ax[0].value[a] * ax[1].value[b]);
    } else {
        for (int a = 0; a < ax[0].count; ++a)
            for (int b = 0; b < ax[1].count; ++b) {
                const double vab = ax[0].value[a] * ax[1].value[b];
                const std::size_t iab =
                    (static_cast<std::size_t>(ax[0].index[a]) * M + static_cast<std::size_t>(ax[1].index[b])) * M;
                for (int c = 0; c < ax[2].count; ++c)
                    f(iab + static_cast<std::size_t>(ax[2].index[c]), vab * ax[2].value[c]);
            }
    }
}

} // namespace driftlab
