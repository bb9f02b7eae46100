#pragma once

// Fourier-Galerkin discretisation of the generator L u = 1/2 Lap u + b . grad u
// and its adjoint L* u = 1/2 Lap u - div(b u) on T^d.
//
// The drift is sampled on an N^d grid, N = 2 oversample K (oversample >= 3), and its
// spectrum kept for |q_j| <= 2K. With N > 4K the pseudospectral products in
// apply/apply_adjoint are alias-free on the retained modes |k_j| <= K, so they agree
// with the dense Galerkin matrix
//   A_{k,m} = -2 pi^2 |k|^2 delta_{km} + sum_j bhat_j(k - m) 2 pi i m_j,
// and L* is represented by the conjugate transpose A^H.

#include "driftlab/basis.hpp"
#include "driftlab/fourier.hpp"
#include "driftlab/types.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace driftlab {

inline constexpr int kDefaultOversample = 3;

struct SolverOptions {
    /// Solvability tolerance: |<f, mu>| (Poisson) or |int f| (adjoint) relative to |f|.
    double solvability_tol = 1e-8;
    /// Required relative L^2 residual of the computed solution.
    double residual_tol = 1e-8;
};

struct InvariantMeasure {
    FourierField density;
    double min_grid_value = 0.0;
    /// Reciprocal condition estimate of the bordered system (spectral solves only).
    double rcond = 0.0;
    std::vector<std::string> warnings;

    InvariantMeasure(FourierField d) : density(std::move(d)) {}
    double operator()(const Point& x) const { return density.evaluate(x); }
};

class Generator {
public:
    Generator(const VectorField& b, int K, int oversample = kDefaultOversample);

    int dim() const { return dim_; }
    int K() const { return K_; }
    /// Collocation points per axis.
    int grid_points() const { return N_; }
    /// Drift component j with modes |q| <= 2K.
    const FourierField& drift_spectrum(int j) const { return bhat_[static_cast<std::size_t>(j)]; }

    /// Dense Galerkin matrix A (or A^H).
    Eigen::MatrixXcd matrix(bool adjoint = false) const;

    FourierField apply(const FourierField& u) const;
    FourierField apply_adjoint(const FourierField& u) const;

private:
    /// A or A^H with the k = 0 row and column removed.
    Eigen::MatrixXcd reduced_matrix(bool adjoint) const;

    friend FourierField solve_poisson(const Generator&, const FourierField&, const InvariantMeasure&,
                                      const SolverOptions&);
    friend FourierField solve_adjoint(const Generator&, const FourierField&, const SolverOptions&);

    int dim_;
    int K_;
    int N_;
    std::vector<FourierField> bhat_;
    std::vector<std::vector<double>> bgrid_;
};

/// L u with the truncation of u.
FourierField apply_generator(const VectorField& b, const FourierField& u, int oversample = kDefaultOversample);
FourierField apply_adjoint_generator(const VectorField& b, const FourierField& u,
                                     int oversample = kDefaultOversample);

/// Solves L* mu = 0 with the k = 0 equation replaced by c_0 = 1. Throws NumericalError
/// when the system is numerically singular; a non-positive grid minimum is reported
/// in `warnings`.
InvariantMeasure invariant_measure(const Generator& gen);
InvariantMeasure invariant_measure(const VectorField& b, int K, int oversample = kDefaultOversample);

/// f - (int f dmu) 1.
FourierField center(const FourierField& f, const InvariantMeasure& mu);

/// Unique zero-mean u with L u = f; f must satisfy int f dmu = 0.
FourierField solve_poisson(const Generator& gen, const FourierField& f, const InvariantMeasure& mu,
                           const SolverOptions& opts = {});
FourierField solve_poisson(const VectorField& b, const FourierField& f, const InvariantMeasure& mu,
                           const SolverOptions& opts = {}, int oversample = kDefaultOversample);

/// Unique zero-mean u with L* u = f; f must have zero Lebesgue mean.
FourierField solve_adjoint(const Generator& gen, const FourierField& f, const SolverOptions& opts = {});
FourierField solve_adjoint(const VectorField& b, const FourierField& f, const SolverOptions& opts = {},
                           int oversample = kDefaultOversample);

/// e^{2B}/Z with Z = int e^{2B} by the periodic trapezoid rule (spectrally accurate).
double gradient_normalizer(const ScalarField& B, int points_per_axis = 0);
InvariantMeasure gradient_oracle(const ScalarField& B, int K, int oversample = kDefaultOversample);

/// v = (L*)^{-1}[-sum_j d_j(h_j mu)], the first-order change of mu_b in direction h
/// with the sign convention mu_{b+h} = mu_b - v + O(|h|^2).
FourierField linearize_invariant(const Generator& gen, const VectorField& h, const InvariantMeasure& mu,
                                 const SolverOptions& opts = {});

/// int |grad L^{-1}[g - int g dmu]|^2 dmu.
double clt_variance(const Generator& gen, const FourierField& g, const InvariantMeasure& mu,
                    const SolverOptions& opts = {});

/// Quadrature Gram int Phi_r Phi_s w in ScalingLevelJ coordinates.
Eigen::MatrixXd weighted_gram(const BasisSpec& spec, const ScalarField& weight, int depth = -1);
/// Same with w = mu^power, mu a Fourier field (power = -1 gives the 1/mu weight).
Eigen::MatrixXd weighted_gram(const BasisSpec& spec, const FourierField& mu, double power, int depth = -1);

/// d = 1 constant-flux solution of 1/2 mu' - b mu = c, periodic, int mu = 1.
struct FluxSolution {
    InvariantMeasure measure;
    double flux = 0.0;
    /// mu at i / n, i = 0..n-1.
    std::vector<double> grid;
};
FluxSolution invariant_1d_flux(const VectorField& b, int K, int grid_points = 1 << 12);

} // namespace driftlab
