#pragma once

// Gaussian posterior on V_J^{(x)d} under the wavelet-series prior.
//
// All coordinates share the precision P = T * W gram W^T + diag(sigma_l^{-2})
// (multiresolution coordinates, W the orthogonal wavelet transform), and the
// mean of coordinate j is P^{-1} W m_j. MAP and posterior mean coincide.

#include "driftlab/basis.hpp"
#include "driftlab/likelihood.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace driftlab {

class GaussianPosterior {
public:
    GaussianPosterior(BasisSpec spec, PriorSpec prior, double T, Eigen::MatrixXd precision, Eigen::MatrixXd rhs,
                      std::uint64_t stats_hash);

    const BasisSpec& spec() const { return spec_; }
    const PriorSpec& prior() const { return prior_; }
    double horizon() const { return T_; }
    int dim() const { return spec_.dim(); }
    std::uint64_t stats_hash() const { return stats_hash_; }

    const Eigen::MatrixXd& precision() const { return precision_; }
    /// Lower Cholesky factor L with P = L L^T.
    Eigen::MatrixXd cholesky_factor() const { return llt_.matrixL(); }
    const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
    /// W m, v_J x d.
    const Eigen::MatrixXd& rhs() const { return rhs_; }
    /// MAP coefficients in multiresolution coordinates.
    const CoefficientField& mean() const { return mean_; }

    /// P^{-1} by direct inversion.
    Eigen::MatrixXd covariance() const;
    /// max_j |P th_j - W m_j| / |W m_j| (0 when W m_j = 0 and th_j = 0).
    double normal_equation_residual() const;

    std::uint64_t hash() const;

private:
    BasisSpec spec_;
    PriorSpec prior_;
    double T_;
    Eigen::MatrixXd precision_;
    Eigen::MatrixXd rhs_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    CoefficientField mean_;
    std::uint64_t stats_hash_;
};

GaussianPosterior fit(const SufficientStatistics& stats, const PriorSpec& prior);

struct SampleOptions {
    int threads = 1;
    /// Test hook: force xi = 0 so every draw is the MAP.
    bool zero_noise = false;
};

/// Draw i uses the stream derive_seed(seed, i), so draws do not depend on threads.
std::vector<CoefficientField> sample(const GaussianPosterior& post, std::size_t n, std::uint64_t seed,
                                     const SampleOptions& opts = {});

struct FunctionalMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Posterior mean and variance of <b_j, phi>; phi is a scalar field.
FunctionalMoments functional_moments(const GaussianPosterior& post, const CoefficientField& phi, int j);

/// Points per axis of the sup-norm grid for a level-J basis: 2^{J+4}.
int band_grid_points(const BasisSpec& spec);

/// Values of every component on the tensor grid {i/n}^d, row-major; n^d x components.
Eigen::MatrixXd grid_values(const CoefficientField& c, int n);

/// Level-quantile of sup_x |draw(x) - center(x)| over the grid (max over components).
/// Needs at least 100 draws.
double credible_band(const std::vector<CoefficientField>& draws, const CoefficientField& center, double level);

/// Largest |eigenvalue| of Gamma^{-1/2} (gram_hat - Gamma) Gamma^{-1/2}.
double isometry_gap(const Eigen::MatrixXd& gram_hat, const Eigen::MatrixXd& gamma);
inline double isometry_gap(const SufficientStatistics& stats, const Eigen::MatrixXd& gamma)
{
    return isometry_gap(stats.gram, gamma);
}

} // namespace driftlab
