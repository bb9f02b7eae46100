#pragma once

// Monte Carlo diagnostics that tie the statistical and PDE halves together:
// contraction-rate slopes, Bernstein-von Mises variance checks, the plug-in
// CLT for the invariant measure, delta-method remainders and coverage.
//
// Every study is a pure function of its configuration: replication r at
// horizon index h simulates with seed derive_seed(derive_seed(seed, h), r),
// and results are gathered by replication index whatever the thread count.
// All variance and Gram targets come from the elliptic module.

#include "driftlab/basis.hpp"
#include "driftlab/drift_presets.hpp"
#include "driftlab/fourier.hpp"
#include "driftlab/posterior.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace driftlab {

struct StudyConfig {
    int dim = 1;
    DriftModel truth = drift_preset("zero", 1);
    /// Smoothness label s of the truth; only enters the theoretical slope.
    double smoothness = 1e300;
    double alpha = 0.0;
    double a = 2.0;
    /// Fixed level J; otherwise J = round(log2 T / (2a + d)).
    std::optional<int> level;
    std::vector<double> horizons{1000.0};
    int replications = 20;
    std::uint64_t seed = 1;
    Family family = Family::Daubechies;
    int vanishing_moments = 6;
    double delta = 1e-3;
    Point x0{0, 0, 0};
    int K = 32;
    int oversample = 3;
    int threads = 1;

    void validate() const;
    std::uint64_t hash() const;
    PriorSpec prior_for(double T) const;
    BasisSpec basis_for(double T) const;
    std::uint64_t replication_seed(std::size_t horizon_index, std::size_t replication) const;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct StudyReport {
    std::string study;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<Table> tables;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::pair<std::string, bool>> checks;
    std::vector<std::string> warnings;

    /// Throws ConfigError for an unknown name.
    double metric(const std::string& name) const;
    bool check(const std::string& name) const;
    const Table& table(const std::string& name) const;
    bool passed() const;
    std::string summary() const;
};

/// One CSV per table, named <prefix><table>.csv, plus <prefix>summary.txt.
void write_report(const StudyReport& report, const std::string& dir, const std::string& prefix = "");

enum class ErrorNorm { L2, Sup };

/// Named test function for functional-type diagnostics.
struct TestFunction {
    std::string name;
    ScalarField fn;
};

/// Data of one simulate -> stats -> fit replication.
struct Replication {
    std::uint64_t seed = 0;
    GaussianPosterior posterior;
};

Replication run_replication(const StudyConfig& cfg, std::size_t horizon_index, std::size_t replication);

/// L2 or sup distance between a fitted field and the truth on a 256-point (d = 1),
/// 64-point (d = 2) or 24-point (d = 3) grid per axis.
double drift_error(const CoefficientField& estimate, const DriftModel& truth, ErrorNorm norm);

/// Needs >= 3 horizons and >= 10 replications. Reports the least-squares slope of
/// log median error against log T with a 200-resample bootstrap half-width.
StudyReport rate_study(const StudyConfig& cfg, ErrorNorm norm = ErrorNorm::L2);

/// At the last horizon: T Var_post<b_j, phi> against <phi, phi>_{1/mu0} per
/// replication, and the standardised MAP functional across replications.
StudyReport bvm_check(const StudyConfig& cfg, const std::vector<TestFunction>& phis, int j = 0);

/// At the last horizon, replication 0: `draws` posterior draws b, each mapped to
/// sqrt T int (mu_b - mu_bhat) g, compared with clt_variance at the truth. In d = 1
/// also the pointwise Green-kernel variance at x = (i + 1/2)/5, both from the
/// draws and from a mollified point mass (width `mollifier`).
StudyReport invariant_clt_check(const StudyConfig& cfg, const FourierField& g, std::size_t draws = 200,
                                double mollifier = 0.005);

/// r(c) = |mu_{b0 + c h} - mu_{b0} + v_{b0, c h}|_{L2} for decreasing positive scales.
StudyReport delta_remainder(const StudyConfig& cfg, const VectorField& h, const std::vector<double>& scales);

/// Needs >= 50 replications. Equal-tailed `level` intervals for each <b_j, phi>
/// and a sup-norm band from `band_draws` posterior draws, per horizon.
StudyReport coverage_study(const StudyConfig& cfg, const std::vector<TestFunction>& phis, int j = 0,
                           double level = 0.9, std::size_t band_draws = 200);

/// sqrt T times the ergodic average of g under the truth, per replication, against
/// clt_variance. Uses the last horizon.
StudyReport ergodic_clt_study(const StudyConfig& cfg, const ScalarField& g);

/// Median isometry gap between the empirical Gram and the mu0-weighted Gram per horizon.
StudyReport isometry_study(const StudyConfig& cfg);

/// Simple summaries used by the studies.
double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);
double sample_mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);
/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace driftlab
