#pragma once

// Girsanov log-likelihood of a discretely recorded path and its sufficient
// statistics on V_J:
//   gram = (1/T) sum_i Phi(X_i) Phi(X_i)^T delta      (ScalingLevelJ coords)
//   m_j  = sum_i Phi(X_i) (X^j_{i+1} - X^j_i)           (left-point Ito sums)
// so that l_T(b) = -(T/2) sum_j th_j^T gram th_j + sum_j th_j^T m_j.

#include "driftlab/basis.hpp"
#include "driftlab/sde.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace driftlab {

struct SufficientStatistics {
    BasisSpec spec;
    double T = 0.0;
    double delta = 0.0;
    Eigen::MatrixXd gram; ///< v_J x v_J
    Eigen::MatrixXd m;    ///< v_J x d, column j is coordinate j
    std::uint64_t basis_hash = 0;
    std::uint64_t path_hash = 0;

    int dim() const { return spec.dim(); }
    std::uint64_t hash() const;
};

struct StatsOptions {
    int threads = 1;
    /// Steps per chunk; partial sums are added in chunk order, so the result
    /// does not depend on `threads`.
    std::size_t chunk_steps = 65536;
};

SufficientStatistics sufficient_stats(const DiffusionPath& path, const BasisSpec& spec, const StatsOptions& opts = {});

/// Direct form: -1/2 sum |b(X_i)|^2 delta + sum b(X_i) . (X_{i+1} - X_i).
double log_likelihood(const DiffusionPath& path, const CoefficientField& b);

/// Quadratic form evaluated from sufficient statistics.
double log_likelihood(const SufficientStatistics& stats, const CoefficientField& b);

/// h_T(b1, b2) = (sum_j dth_j^T gram dth_j)^{1/2}.
double hellinger_distance(const SufficientStatistics& stats, const CoefficientField& b1, const CoefficientField& b2);

/// Terms of the LAN identity at b0 in direction h.
struct LanTerms {
    double ell_b0 = 0.0;      ///< l_T(b0)
    double ell_shifted = 0.0; ///< l_T(b0 + h / sqrt T)
    double W = 0.0;           ///< (1/sqrt T) sum h(X_i) . (dX_i - b0(X_i) delta)
    double quad = 0.0;        ///< (1/T) sum |h(X_i)|^2 delta
    double residual = 0.0;    ///< |ell_shifted - ell_b0 - W + quad/2|
};

LanTerms lan_decomposition(const DiffusionPath& path, const CoefficientField& b0, const CoefficientField& h);

inline double lan_residual(const DiffusionPath& path, const CoefficientField& b0, const CoefficientField& h)
{
    return lan_decomposition(path, b0, h).residual;
}

} // namespace driftlab
