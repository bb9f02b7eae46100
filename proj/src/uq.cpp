#include "driftlab/uq.hpp"

#include "driftlab/elliptic.hpp"
#include "driftlab/error.hpp"
#include "driftlab/green1d.hpp"
#include "driftlab/hash.hpp"
#include "driftlab/likelihood.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace driftlab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

/// Runs f(i) for i < n on up to `threads` workers; results are written by index,
/// so the outcome does not depend on scheduling. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

std::string horizon_tag(double T)
{
    std::ostringstream os;
    os << "T=" << std::setprecision(12) << T;
    return os.str();
}

double normal_quantile(double p)
{
    // bisection on the normal cdf; 200 halvings reach machine precision
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

int error_grid_points(int d)
{
    return d == 1 ? 256 : d == 2 ? 64 : 24;
}

/// Grid points of {i/n}^d in row-major order.
std::vector<Point> tensor_grid(int d, int n)
{
    std::size_t total = 1;
    for (int j = 0; j < d; ++j)
        total *= static_cast<std::size_t>(n);
    std::vector<Point> pts(total, Point{0, 0, 0});
    for (std::size_t g = 0; g < total; ++g) {
        std::size_t rest = g;
        for (int j = d - 1; j >= 0; --j) {
            pts[g][j] = static_cast<double>(rest % static_cast<std::size_t>(n)) / n;
            rest /= static_cast<std::size_t>(n);
        }
    }
    return pts;
}

/// max over grid points and components of |c(x) - b(x)|.
double sup_distance(const CoefficientField& c, const VectorField& b, int n)
{
    const Eigen::MatrixXd v = grid_values(c, n);
    const auto pts = tensor_grid(c.spec().dim(), n);
    double worst = 0.0;
    for (std::size_t g = 0; g < pts.size(); ++g) {
        const Point t = b(pts[g]);
        for (int j = 0; j < c.components(); ++j)
            worst = std::max(worst, std::abs(v(static_cast<Eigen::Index>(g), j) - t[j]));
    }
    return worst;
}

/// <b_j, phi> for phi in V_J: the L2 projection of b_j paired with phi.
double truth_functional(const BasisSpec& spec, const DriftModel& truth, const CoefficientField& phi, int j)
{
    const CoefficientField pb = project(spec, truth.field, Coords::Multiresolution);
    const CoefficientField pm = to_coords(phi, Coords::Multiresolution);
    return pb.values().col(j).dot(pm.values().col(0));
}

VectorField field_of(const CoefficientField& c)
{
    return FieldEvaluator(c).as_vector_field();
}

void require_component(const StudyConfig& cfg, int j)
{
    if (j < 0 || j >= cfg.dim)
        throw ConfigError("functional coordinate j must be in [0," + std::to_string(cfg.dim) + ")");
}

double jarque_bera(const std::vector<double>& z)
{
    const double n = static_cast<double>(z.size());
    if (z.size() < 3)
        return std::nan("");
    const double m = sample_mean(z);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : z) {
        const double e = v - m;
        m2 += e * e;
        m3 += e * e * e;
        m4 += e * e * e * e;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 == 0.0)
        return std::nan("");
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    return n / 6.0 * (skew * skew + 0.25 * (kurt - 3) * (kurt - 3));
}

} // namespace

// ---------------------------------------------------------------------------
// summaries

double median(std::vector<double> v)
{
    return quantile(std::move(v), 0.5);
}

double quantile(std::vector<double> v, double q)
{
    if (v.empty())
        throw StatisticsError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double sample_mean(const std::vector<double>& v)
{
    if (v.empty())
        throw StatisticsError("mean of an empty sample");
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v)
{
    if (v.size() < 2)
        throw StatisticsError("variance needs at least two values");
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw StatisticsError("slope needs at least two (x, y) pairs");
    const double mx = sample_mean(x), my = sample_mean(y);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// configuration and reports

void StudyConfig::validate() const
{
    if (dim < 1 || dim > kMaxDim)
        throw ConfigError("d must be in [1,3], got " + std::to_string(dim));
    if (truth.dim != dim)
        throw ConfigError("drift dimension does not match d");
    if (!(smoothness > 0.0))
        throw ConfigError("smoothness s must be > 0");
    PriorSpec{alpha, a, level.value_or(0), dim}.validate();
    if (horizons.empty())
        throw ConfigError("horizons must not be empty");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (!(horizons[i] > 1.0) || !std::isfinite(horizons[i]))
            throw ConfigError("horizons must be finite and > 1");
        if (i > 0 && !(horizons[i] > horizons[i - 1]))
            throw ConfigError("horizons must be strictly increasing");
        step_count(horizons[i], delta);
    }
    if (replications < 1)
        throw ConfigError("replications must be >= 1");
    if (family == Family::Daubechies && (vanishing_moments < 2 || vanishing_moments > kMaxVanishingMoments))
        throw ConfigError("Daubechies S must be in [2,10]");
    if (!(delta > 0.0))
        throw ConfigError("delta must be > 0");
    if (K < 1)
        throw ConfigError("K must be >= 1");
    if (oversample < 3)
        throw ConfigError("oversample must be >= 3");
    if (threads < 1)
        throw ConfigError("threads must be >= 1");
}

std::uint64_t StudyConfig::hash() const
{
    Fnv1a h;
    h.update_value(dim);
    h.update_value(truth.hash());
    h.update_value(smoothness);
    h.update_value(alpha);
    h.update_value(a);
    h.update_value(level.value_or(-1));
    h.update_doubles(horizons);
    h.update_value(replications);
    h.update_value(seed);
    h.update_value(static_cast<int>(family));
    h.update_value(vanishing_moments);
    h.update_value(delta);
    h.update_doubles(x0);
    h.update_value(K);
    h.update_value(oversample);
    return h.digest();
}

PriorSpec StudyConfig::prior_for(double T) const
{
    if (level) {
        PriorSpec p{alpha, a, *level, dim};
        p.validate();
        return p;
    }
    return PriorSpec::from_horizon(alpha, a, T, dim);
}

BasisSpec StudyConfig::basis_for(double T) const
{
    return build_basis(family, prior_for(T).level, dim, vanishing_moments);
}

std::uint64_t StudyConfig::replication_seed(std::size_t horizon_index, std::size_t replication) const
{
    return derive_seed(derive_seed(seed, horizon_index), replication);
}

double StudyReport::metric(const std::string& name) const
{
    for (const auto& [k, v] : metrics)
        if (k == name)
            return v;
    throw ConfigError("report '" + study + "' has no metric '" + name + "'");
}

bool StudyReport::check(const std::string& name) const
{
    for (const auto& [k, v] : checks)
        if (k == name)
            return v;
    throw ConfigError("report '" + study + "' has no check '" + name + "'");
}

const Table& StudyReport::table(const std::string& name) const
{
    for (const auto& t : tables)
        if (t.name == name)
            return t;
    throw ConfigError("report '" + study + "' has no table '" + name + "'");
}

bool StudyReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

std::string StudyReport::summary() const
{
    std::ostringstream os;
    os << "study " << study << "\n";
    os << "config_hash " << std::hex << std::setw(16) << std::setfill('0') << config_hash << std::dec
       << std::setfill(' ') << "\n";
    os << "seed " << seed << "\n";
    os << std::setprecision(10);
    for (const auto& [k, v] : metrics)
        os << "metric " << k << " " << v << "\n";
    for (const auto& [k, v] : checks)
        os << "check " << k << " " << (v ? "pass" : "fail") << "\n";
    for (const auto& w : warnings)
        os << "warning " << w << "\n";
    return os.str();
}

void write_report(const StudyReport& report, const std::string& dir, const std::string& prefix)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create report directory " + dir + ": " + ec.message());
    auto open = [&](const std::string& name) {
        const auto path = std::filesystem::path(dir) / (prefix + name);
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("cannot write " + path.string());
        return out;
    };
    for (const auto& t : report.tables) {
        auto out = open(t.name + ".csv");
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            out << (c ? "," : "") << t.columns[c];
        out << "\n" << std::setprecision(17);
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << row[c];
            out << "\n";
        }
        if (!out)
            throw IoError("write failed for table " + t.name);
    }
    auto out = open("summary.txt");
    out << report.summary();
    if (!out)
        throw IoError("write failed for summary");
}

// ---------------------------------------------------------------------------
// replications

Replication run_replication(const StudyConfig& cfg, std::size_t horizon_index, std::size_t replication)
{
    const double T = cfg.horizons.at(horizon_index);
    const std::uint64_t s = cfg.replication_seed(horizon_index, replication);
    const DiffusionPath path = simulate(cfg.truth.field, cfg.x0, T, cfg.delta, s);
    const SufficientStatistics stats = sufficient_stats(path, cfg.basis_for(T));
    return {s, fit(stats, cfg.prior_for(T))};
}

double drift_error(const CoefficientField& estimate, const DriftModel& truth, ErrorNorm norm)
{
    const int d = estimate.spec().dim();
    if (truth.dim != d || estimate.components() != d)
        throw ShapeError("estimate and truth dimensions differ");
    const int n = error_grid_points(d);
    if (norm == ErrorNorm::Sup)
        return sup_distance(estimate, truth.field, n);
    const Eigen::MatrixXd v = grid_values(estimate, n);
    const auto pts = tensor_grid(d, n);
    double s = 0.0;
    for (std::size_t g = 0; g < pts.size(); ++g) {
        const Point t = truth(pts[g]);
        for (int j = 0; j < d; ++j) {
            const double e = v(static_cast<Eigen::Index>(g), j) - t[j];
            s += e * e;
        }
    }
    return std::sqrt(s / static_cast<double>(pts.size()));
}

// ---------------------------------------------------------------------------
// studies

StudyReport rate_study(const StudyConfig& cfg, ErrorNorm norm)
{
    cfg.validate();
    if (cfg.horizons.size() < 3)
        throw ConfigError("rate study needs at least 3 horizons");
    if (cfg.replications < 10)
        throw ConfigError("rate study needs at least 10 replications");

    const std::size_t H = cfg.horizons.size();
    const auto R = static_cast<std::size_t>(cfg.replications);
    std::vector<double> err(H * R);
    parallel_for(H * R, cfg.threads, [&](std::size_t i) {
        const Replication rep = run_replication(cfg, i / R, i % R);
        err[i] = drift_error(rep.posterior.mean(), cfg.truth, norm);
    });

    StudyReport rpt;
    rpt.study = norm == ErrorNorm::L2 ? "rate_l2" : "rate_sup";
    rpt.config_hash = cfg.hash();
    rpt.seed = cfg.seed;
    Table reps{"replications", {"T", "J", "replication", "error"}, {}};
    Table hz{"horizons", {"T", "J", "q10", "median", "q90"}, {}};
    std::vector<double> logT, logmed;
    for (std::size_t h = 0; h < H; ++h) {
        const double T = cfg.horizons[h];
        const int J = cfg.prior_for(T).level;
        std::vector<double> e(err.begin() + static_cast<std::ptrdiff_t>(h * R),
                              err.begin() + static_cast<std::ptrdiff_t>((h + 1) * R));
        for (std::size_t r = 0; r < R; ++r)
            reps.rows.push_back({T, double(J), double(r), e[r]});
        const double med = median(e);
        hz.rows.push_back({T, double(J), quantile(e, 0.1), med, quantile(e, 0.9)});
        logT.push_back(std::log(T));
        logmed.push_back(std::log(med));
        rpt.metrics.emplace_back("median_error@" + horizon_tag(T), med);
    }
    const double slope = ls_slope(logT, logmed);

    // bootstrap over replications within each horizon
    Rng rng(derive_seed(cfg.seed, 0xB0075742ULL));
    std::vector<double> boot;
    for (int b = 0; b < 200; ++b) {
        std::vector<double> lm;
        for (std::size_t h = 0; h < H; ++h) {
            std::vector<double> e(R);
            for (std::size_t r = 0; r < R; ++r)
                e[r] = err[h * R + static_cast<std::size_t>(rng.bits() % R)];
            lm.push_back(std::log(median(e)));
        }
        boot.push_back(ls_slope(logT, lm));
    }
    const double half = 0.5 * (quantile(boot, 0.975) - quantile(boot, 0.025));
    const double theory = -std::min(cfg.a, cfg.smoothness) / (2 * cfg.a + cfg.dim);

    rpt.metrics.emplace_back("slope", slope);
    rpt.metrics.emplace_back("slope_halfwidth", half);
    rpt.metrics.emplace_back("theory_slope", theory);
    rpt.checks.emplace_back("slope_within_0.15_of_theory", std::abs(slope - theory) <= 0.15);
    bool decreasing = true;
    for (std::size_t h = 1; h < H; ++h)
        decreasing = decreasing && hz.rows[h][3] < hz.rows[h - 1][3];
    rpt.checks.emplace_back("median_error_decreasing", decreasing);
    rpt.tables = {std::move(reps), std::move(hz)};
    return rpt;
}

StudyReport bvm_check(const StudyConfig& cfg, const std::vector<TestFunction>& phis, int j)
{
    cfg.validate();
    require_component(cfg, j);
    if (phis.empty())
        throw ConfigError("bvm check needs at least one test function");
    const std::size_t hi = cfg.horizons.size() - 1;
    const double T = cfg.horizons[hi];
    const BasisSpec spec = cfg.basis_for(T);

    const InvariantMeasure mu0 = invariant_measure(cfg.truth.field, cfg.K, cfg.oversample);
    const Eigen::MatrixXd Ginv = weighted_gram(spec, mu0.density, -1.0);
    std::vector<CoefficientField> phiJ;
    std::vector<double> target, truth;
    for (const auto& p : phis) {
        if (p.fn.dim != cfg.dim)
            throw ShapeError("test function dimension does not match d");
        CoefficientField c = project(spec, p.fn, Coords::Multiresolution);
        const Eigen::VectorXd s = to_coords(c, Coords::ScalingLevelJ).values().col(0);
        target.push_back(s.dot(Ginv * s));
        truth.push_back(truth_functional(spec, cfg.truth, c, j));
        phiJ.push_back(std::move(c));
    }

    const auto R = static_cast<std::size_t>(cfg.replications);
    const std::size_t P = phis.size();
    std::vector<FunctionalMoments> mom(R * P);
    parallel_for(R, cfg.threads, [&](std::size_t r) {
        const Replication rep = run_replication(cfg, hi, r);
        for (std::size_t p = 0; p < P; ++p)
            mom[r * P + p] = functional_moments(rep.posterior, phiJ[p], j);
    });

    StudyReport rpt;
    rpt.study = "bvm";
    rpt.config_hash = cfg.hash();
    rpt.seed = cfg.seed;
    rpt.warnings = mu0.warnings;
    Table tab{"replications", {"T", "replication", "functional", "T_var_post", "target", "ratio", "z"}, {}};
    for (std::size_t p = 0; p < P; ++p) {
        std::vector<double> ratio, z;
        for (std::size_t r = 0; r < R; ++r) {
            const auto& m = mom[r * P + p];
            const double tv = T * m.variance;
            const double zr = target[p] > 0 ? std::sqrt(T) * (m.mean - truth[p]) / std::sqrt(target[p]) : 0.0;
            ratio.push_back(target[p] > 0 ? tv / target[p] : std::nan(""));
            z.push_back(zr);
            tab.rows.push_back({T, double(r), double(p), tv, target[p], ratio.back(), zr});
        }
        const std::string& name = phis[p].name;
        rpt.metrics.emplace_back("target_" + name, target[p]);
        if (target[p] > 0) {
            const double med = median(ratio);
            rpt.metrics.emplace_back("variance_ratio_" + name, med);
            rpt.checks.emplace_back("variance_ratio_" + name + "_in_[0.85,1.15]", med >= 0.85 && med <= 1.15);
        } else {
            const bool zero = std::all_of(mom.begin(), mom.end(), [](const auto& m) { return m.variance == 0.0; });
            rpt.checks.emplace_back("zero_functional_" + name, zero);
        }
        if (R >= 2 && target[p] > 0) {
            const double zv = sample_variance(z);
            rpt.metrics.emplace_back("z_mean_" + name, sample_mean(z));
            rpt.metrics.emplace_back("z_variance_" + name, zv);
            rpt.metrics.emplace_back("jarque_bera_" + name, jarque_bera(z));
            if (R >= 30)
                rpt.checks.emplace_back("z_variance_" + name + "_within_30pct", std::abs(zv - 1.0) <= 0.3);
        }
    }
    rpt.tables = {std::move(tab)};
    return rpt;
}

StudyReport invariant_clt_check(const StudyConfig& cfg, const FourierField& g, std::size_t draws, double mollifier)
{
    cfg.validate();
    if (g.dim() != cfg.dim)
        throw ShapeError("test function dimension does not match d");
    if (draws < 2)
        throw ConfigError("invariant CLT check needs at least 2 draws");
    const std::size_t hi = cfg.horizons.size() - 1;
    const double T = cfg.horizons[hi];
    const double sT = std::sqrt(T);

    const Generator gen0(cfg.truth.field, cfg.K, cfg.oversample);
    const InvariantMeasure mu0 = invariant_measure(gen0);
    const double target = clt_variance(gen0, g, mu0);

    const Replication rep = run_replication(cfg, hi, 0);
    const InvariantMeasure muhat = invariant_measure(field_of(rep.posterior.mean()), cfg.K, cfg.oversample);
    const auto bs = sample(rep.posterior, draws, derive_seed(rep.seed, 0xD7A3ULL));

    std::vector<double> xs;
    if (cfg.dim == 1)
        for (int k = 0; k < 5; ++k)
            xs.push_back((k + 0.5) / 5.0);
    std::vector<double> stat(draws);
    std::vector<std::vector<double>> point(xs.size(), std::vector<double>(draws));
    std::vector<std::vector<std::string>> warn(draws);
    parallel_for(draws, cfg.threads, [&](std::size_t i) {
        const InvariantMeasure mu = invariant_measure(field_of(bs[i]), cfg.K, cfg.oversample);
        const FourierField diff = mu.density - muhat.density;
        stat[i] = sT * diff.inner(g.resized(cfg.K));
        for (std::size_t k = 0; k < xs.size(); ++k)
            point[k][i] = sT * diff.evaluate(Point{xs[k], 0, 0});
        warn[i] = mu.warnings;
    });

    StudyReport rpt;
    rpt.study = "invariant_clt";
    rpt.config_hash = cfg.hash();
    rpt.seed = cfg.seed;
    std::set<std::string> seen(mu0.warnings.begin(), mu0.warnings.end());
    seen.insert(muhat.warnings.begin(), muhat.warnings.end());
    for (const auto& w : warn)
        seen.insert(w.begin(), w.end());
    rpt.warnings.assign(seen.begin(), seen.end());

    Table tab{"draws", {"T", "draw", "statistic"}, {}};
    for (std::size_t i = 0; i < draws; ++i)
        tab.rows.push_back({T, double(i), stat[i]});
    const double var = sample_variance(stat);
    rpt.metrics.emplace_back("variance", var);
    rpt.metrics.emplace_back("target", target);
    if (target > 0) {
        rpt.metrics.emplace_back("variance_ratio", var / target);
        rpt.checks.emplace_back("variance_ratio_within_30pct", std::abs(var / target - 1.0) <= 0.3);
    } else {
        rpt.checks.emplace_back("statistic_identically_zero",
                                std::all_of(stat.begin(), stat.end(), [](double s) { return s == 0.0; }));
    }
    rpt.tables.push_back(std::move(tab));

    if (cfg.dim == 1) {
        const GreenKernel1d G(cfg.truth.field);
        const int Km = 256;
        const Generator genm(cfg.truth.field, Km, cfg.oversample);
        const InvariantMeasure mum = invariant_measure(genm);
        Table pts{"green_points", {"x", "green_variance", "mollified_variance", "draw_variance"}, {}};
        bool close = true;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double x = xs[k];
            const double gv = G.pointwise_variance(x);
            FourierField bump(1, Km);
            for (int m = -Km; m <= Km; ++m)
                bump[ModeIndex{m, 0, 0}] = std::polar(std::exp(-0.5 * std::pow(kTwoPi * mollifier * m, 2)), -kTwoPi * m * x);
            const double mv = clt_variance(genm, bump, mum);
            const double dv = sample_variance(point[k]);
            pts.rows.push_back({x, gv, mv, dv});
            close = close && std::abs(mv / gv - 1.0) <= 0.1;
        }
        rpt.checks.emplace_back("green_matches_mollified_within_10pct", close);
        rpt.tables.push_back(std::move(pts));
    }
    return rpt;
}

StudyReport delta_remainder(const StudyConfig& cfg, const VectorField& h, const std::vector<double>& scales)
{
    cfg.validate();
    if (h.dim != cfg.dim)
        throw ShapeError("direction dimension does not match d");
    if (scales.size() < 2)
        throw ConfigError("delta remainder needs at least two scales");
    for (std::size_t i = 0; i < scales.size(); ++i)
        if (!(scales[i] > 0.0) || (i > 0 && !(scales[i] < scales[i - 1])))
            throw ConfigError("scales must be positive and decreasing");

    const Generator gen0(cfg.truth.field, cfg.K, cfg.oversample);
    const InvariantMeasure mu0 = invariant_measure(gen0);
    const FourierField v1 = linearize_invariant(gen0, h, mu0);

    StudyReport rpt;
    rpt.study = "delta_remainder";
    rpt.config_hash = cfg.hash();
    rpt.seed = cfg.seed;
    rpt.warnings = mu0.warnings;
    Table tab{"scales", {"scale", "remainder", "linearity_error"}, {}};
    std::vector<double> r;
    double worst_lin = 0.0;
    for (double c : scales) {
        const int d = cfg.dim;
        const VectorField hc{d, [&h, c](const Point& x) {
                                 Point p = h(x);
                                 for (double& v : p)
                                     v *= c;
                                 return p;
                             }};
        const VectorField bc{d, [&cfg, &h, c, d](const Point& x) {
                                 Point p = cfg.truth(x);
                                 const Point q = h(x);
                                 for (int j = 0; j < d; ++j)
                                     p[j] += c * q[j];
                                 return p;
                             }};
        const FourierField vc = linearize_invariant(gen0, hc, mu0);
        const double scale = std::max(vc.l2_norm(), 1e-300);
        const double lin = (vc - c * v1).l2_norm() / scale;
        worst_lin = std::max(worst_lin, lin);
        const InvariantMeasure muc = invariant_measure(bc, cfg.K, cfg.oversample);
        r.push_back((muc.density - mu0.density + vc).l2_norm());
        tab.rows.push_back({c, r.back(), lin});
    }
    Table ratios{"ratios", {"scale", "next_scale", "ratio", "expected"}, {}};
    bool quadratic = true;
    const bool all_zero = std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; });
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const double expected = std::pow(scales[i] / scales[i + 1], 2);
        const double ratio = r[i] / r[i + 1];
        ratios.rows.push_back({scales[i], scales[i + 1], ratio, expected});
        // [3.4, 4.6] for halving, rescaled for other steps
        quadratic = quadratic && ratio / expected >= 0.85 && ratio / expected <= 1.15;
    }
    rpt.metrics.emplace_back("linearity_error", worst_lin);
    rpt.checks.emplace_back("linearity_within_1e-10", worst_lin <= 1e-10);
    rpt.checks.emplace_back("remainder_quadratic", all_zero || quadratic);
    rpt.tables = {std::move(tab), std::move(ratios)};
    return rpt;
}

StudyReport coverage_study(const StudyConfig& cfg, const std::vector<TestFunction>& phis, int j, double level,
                           std::size_t band_draws)
{
    cfg.validate();
    require_component(cfg, j);
    if (cfg.replications < 50)
        throw ConfigError("coverage study needs at least 50 replications");
    if (!(level > 0.0 && level < 1.0))
        throw ConfigError("credible level must be in (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    const auto R = static_cast<std::size_t>(cfg.replications);
    const std::size_t P = phis.size();

    StudyReport rpt;
    rpt.study = "coverage";
    rpt.config_hash = cfg.hash();
    rpt.seed = cfg.seed;
    Table tab{"replications", {"T", "replication", "functional", "mean", "sd", "truth", "covered"}, {}};
    Table band{"bands", {"T", "replication", "radius", "sup_error", "covered"}, {}};
    for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
        const double T = cfg.horizons[h];
        const BasisSpec spec = cfg.basis_for(T);
        std::vector<CoefficientField> phiJ;
        std::vector<double> truth;
        for (const auto& p : phis) {
            if (p.fn.dim != cfg.dim)
                throw ShapeError("test function dimension does not match d");
            phiJ.push_back(project(spec, p.fn, Coords::Multiresolution));
            truth.push_back(truth_functional(spec, cfg.truth, phiJ.back(), j));
        }
        std::vector<FunctionalMoments> mom(R * P);
        std::vector<double> radius(R), sup_err(R);
        parallel_for(R, cfg.threads, [&](std::size_t r) {
            const Replication rep = run_replication(cfg, h, r);
            for (std::size_t p = 0; p < P; ++p)
                mom[r * P + p] = functional_moments(rep.posterior, phiJ[p], j);
            if (band_draws > 0) {
                const auto draws = sample(rep.posterior, band_draws, derive_seed(rep.seed, 0xBA4DULL));
                radius[r] = credible_band(draws, rep.posterior.mean(), level);
                sup_err[r] = sup_distance(rep.posterior.mean(), cfg.truth.field, band_grid_points(spec));
            }
        });
        for (std::size_t p = 0; p < P; ++p) {
            int covered = 0;
            for (std::size_t r = 0; r < R; ++r) {
                const auto& m = mom[r * P + p];
                const double sd = std::sqrt(m.variance);
                const bool hit = std::abs(truth[p] - m.mean) <= z * sd;
                covered += hit;
                tab.rows.push_back({T, double(r), double(p), m.mean, sd, truth[p], hit ? 1.0 : 0.0});
            }
            const double cov = static_cast<double>(covered) / static_cast<double>(R);
            rpt.metrics.emplace_back("coverage_" + phis[p].name + "@" + horizon_tag(T), cov);
            rpt.checks.emplace_back("coverage_" + phis[p].name + "@" + horizon_tag(T) + "_at_least_level-0.1",
                                    cov >= level - 0.1);
        }
        if (band_draws > 0) {
            int covered = 0;
            for (std::size_t r = 0; r < R; ++r) {
                const bool hit = sup_err[r] <= radius[r];
                covered += hit;
                band.rows.push_back({T, double(r), radius[r], sup_err[r], hit ? 1.0 : 0.0});
            }
            rpt.metrics.emplace_back("band_coverage@" + horizon_tag(T),
                                     static_cast<double>(covered) / static_cast<double>(R));
        }
    }
    rpt.tables = {std::move(tab)};
    if (band_draws > 0)
        rpt.tables.push_back(std::move(band));
    return rpt;
}

StudyReport ergodic_clt_study(const StudyConfig& cfg, const ScalarField& g)
{
    cfg.validate();
    if (g.dim != cfg.dim)
        throw ShapeError("test function dimension does not match d");
    const std::size_t hi = cfg.horizons.size() - 1;
    const double T = cfg.horizons[hi];
    const Generator gen0(cfg.truth.field, cfg.K, cfg.oversample);
    const InvariantMeasure mu0 = invariant_measure(gen0);
    const FourierField gf = FourierField::from_function(g, cfg.K);
    const double target = clt_variance(gen0, gf, mu0);
    const double mean_g = mu0.density.inner(gf);

    const auto R = static_cast<std::size_t>(cfg.replications);
    std::vector<double> stat(R);
    parallel_for(R, cfg.threads, [&](std::size_t r) {
        const DiffusionPath path = simulate(cfg.truth.field, cfg.x0, T, cfg.delta, cfg.replication_seed(hi, r));
        stat[r] = std::sqrt(T) * (ergodic_average(path, g) - mean_g);
    });

    StudyReport rpt;
    rpt.study = "ergodic_clt";
    rpt.config_hash = cfg.hash();
    rpt.seed = cfg.seed;
    rpt.warnings = mu0.warnings;
    Table tab{"replications", {"T", "replication", "statistic"}, {}};
    for (std::size_t r = 0; r < R; ++r)
        tab.rows.push_back({T, double(r), stat[r]});
    rpt.tables = {std::move(tab)};
    const double m = sample_mean(stat);
    rpt.metrics.emplace_back("mean", m);
    rpt.metrics.emplace_back("target", target);
    rpt.metrics.emplace_back("integral_g_dmu", mean_g);
    if (R >= 2) {
        const double v = sample_variance(stat);
        rpt.metrics.emplace_back("variance", v);
        rpt.metrics.emplace_back("variance_ratio", target > 0 ? v / target : std::nan(""));
        rpt.checks.emplace_back("variance_within_25pct", target > 0 ? std::abs(v / target - 1.0) <= 0.25 : v == 0.0);
        rpt.checks.emplace_back("mean_within_4sigma",
                                std::abs(m) <= 4.0 * std::sqrt(target / static_cast<double>(R)));
    }
    return rpt;
}

StudyReport isometry_study(const StudyConfig& cfg)
{
    cfg.validate();
    const InvariantMeasure mu0 = invariant_measure(cfg.truth.field, cfg.K, cfg.oversample);
    const std::size_t H = cfg.horizons.size();
    const auto R = static_cast<std::size_t>(cfg.replications);
    std::vector<Eigen::MatrixXd> gamma(H);
    for (std::size_t h = 0; h < H; ++h)
        gamma[h] = weighted_gram(cfg.basis_for(cfg.horizons[h]), mu0.density, 1.0);
    std::vector<double> gap(H * R);
    parallel_for(H * R, cfg.threads, [&](std::size_t i) {
        const std::size_t h = i / R;
        const double T = cfg.horizons[h];
        const DiffusionPath path = simulate(cfg.truth.field, cfg.x0, T, cfg.delta, cfg.replication_seed(h, i % R));
        gap[i] = isometry_gap(sufficient_stats(path, cfg.basis_for(T)), gamma[h]);
    });

    StudyReport rpt;
    rpt.study = "isometry";
    rpt.config_hash = cfg.hash();
    rpt.seed = cfg.seed;
    rpt.warnings = mu0.warnings;
    Table tab{"replications", {"T", "replication", "gap"}, {}};
    std::vector<double> med;
    for (std::size_t h = 0; h < H; ++h) {
        std::vector<double> e(gap.begin() + static_cast<std::ptrdiff_t>(h * R),
                              gap.begin() + static_cast<std::ptrdiff_t>((h + 1) * R));
        for (std::size_t r = 0; r < R; ++r)
            tab.rows.push_back({cfg.horizons[h], double(r), e[r]});
        med.push_back(median(e));
        rpt.metrics.emplace_back("median_gap@" + horizon_tag(cfg.horizons[h]), med.back());
    }
    bool decreasing = true;
    for (std::size_t h = 1; h < H; ++h)
        decreasing = decreasing && med[h] < med[h - 1];
    rpt.checks.emplace_back("median_gap_strictly_decreasing", decreasing);
    rpt.tables = {std::move(tab)};
    return rpt;
}

} // namespace driftlab
