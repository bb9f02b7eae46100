#include "driftlab/pipeline.hpp"

#include "driftlab/elliptic.hpp"
#include "driftlab/io.hpp"
#include "driftlab/likelihood.hpp"
#include "driftlab/posterior.hpp"
#include "driftlab/sde.hpp"

#include <filesystem>
#include <fstream>

namespace driftlab {

int exit_code_for(const std::exception& e)
{
    if (const auto* s = dynamic_cast<const StageError*>(&e))
        return s->code();
    if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
        dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const PreconditionError*>(&e))
        return kExitSchema;
    if (dynamic_cast<const IoError*>(&e))
        return kExitIo;
    return kExitNumerical;
}

Table posterior_grid_table(const GaussianPosterior& post, const DriftModel& truth, int n)
{
    const BasisSpec& spec = post.spec();
    const int d = spec.dim();
    const Eigen::MatrixXd cov = post.covariance();
    const Eigen::MatrixXd mean = grid_values(post.mean(), n);
    Table t{"fit", {}, {}};
    for (int k = 0; k < d; ++k)
        t.columns.push_back("x" + std::to_string(k + 1));
    for (int j = 0; j < d; ++j) {
        t.columns.push_back("mean_" + std::to_string(j + 1));
        t.columns.push_back("sd_" + std::to_string(j + 1));
        t.columns.push_back("truth_" + std::to_string(j + 1));
    }
    std::size_t total = 1;
    for (int k = 0; k < d; ++k)
        total *= static_cast<std::size_t>(n);
    std::vector<double> phi(spec.size());
    for (std::size_t g = 0; g < total; ++g) {
        Point x{0, 0, 0};
        std::size_t rest = g;
        for (int k = d - 1; k >= 0; --k) {
            x[k] = static_cast<double>(rest % static_cast<std::size_t>(n)) / n;
            rest /= static_cast<std::size_t>(n);
        }
        // basis values at x in multiresolution coordinates
        std::fill(phi.begin(), phi.end(), 0.0);
        spec.for_each_active(x, [&](std::size_t i, double v) { phi[i] += v; });
        forward_transform(spec, phi);
        const Eigen::Map<const Eigen::VectorXd> pv(phi.data(), static_cast<Eigen::Index>(phi.size()));
        const double sd = std::sqrt(std::max(0.0, pv.dot(cov * pv)));
        const Point b0 = truth(x);
        std::vector<double> row(x.begin(), x.begin() + d);
        for (int j = 0; j < d; ++j) {
            row.push_back(mean(static_cast<Eigen::Index>(g), j));
            row.push_back(sd);
            row.push_back(b0[j]);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

StudyReport run_study(const RunConfig& cfg, const std::string& kind_override, int threads)
{
    if (!cfg.study && kind_override.empty())
        throw ConfigError("study: no study block in the configuration");
    RunConfig c = cfg;
    if (!c.study)
        c.study = StudyBlock{};
    if (!kind_override.empty())
        c.study->kind = kind_override;
    c.validate();
    const StudyBlock& s = *c.study;
    StudyConfig sc = study_config(c);
    sc.threads = threads;
    const int d = c.model.d;

    std::vector<TestFunction> phis;
    for (const auto& f : s.functionals)
        phis.push_back(named_test_function(f, d));
    const ScalarField g = named_test_function(s.test_function, d).fn;

    if (s.kind == "rate")
        return rate_study(sc, s.norm == "sup" ? ErrorNorm::Sup : ErrorNorm::L2);
    if (s.kind == "bvm")
        return bvm_check(sc, phis, s.coordinate);
    if (s.kind == "invariant")
        return invariant_clt_check(sc, FourierField::from_function(g, c.solver.K), static_cast<std::size_t>(s.draws));
    if (s.kind == "coverage")
        return coverage_study(sc, phis, s.coordinate, s.level, static_cast<std::size_t>(s.band_draws));
    if (s.kind == "ergodic")
        return ergodic_clt_study(sc, g);
    if (s.kind == "isometry")
        return isometry_study(sc);
    if (s.kind == "delta") {
        const ScalarField h = named_test_function(s.direction, d).fn;
        const int j = s.coordinate;
        const VectorField hv{d, [h, j](const Point& x) {
                                 Point p{0, 0, 0};
                                 p[j] = h(x);
                                 return p;
                             }};
        return delta_remainder(sc, hv, s.scales);
    }
    throw ConfigError("study.kind: unknown study \"" + s.kind + "\"");
}

PipelineArtifacts run_pipeline(const RunConfig& cfg, const std::string& out_dir, const PipelineOptions& opts)
{
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    const fs::path reports = dir / "reports";
    run_stage("setup", [&] {
        cfg.validate();
        std::error_code ec;
        fs::create_directories(reports, ec);
        if (ec)
            throw IoError("cannot create " + reports.string() + ": " + ec.message());
    });

    PipelineArtifacts out;
    out.resolved = (dir / "resolved.config").string();
    run_stage("config", [&] {
        std::ofstream f(out.resolved, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot write " + out.resolved);
        f << resolved_config(cfg);
        if (!f)
            throw IoError("write failed for " + out.resolved);
    });

    const DriftModel truth = run_stage("model", [&] { return resolve_drift(cfg); });
    const double T = cfg.discretization.T;

    out.path = (dir / "path.bin").string();
    const DiffusionPath path = run_stage("simulate", [&] {
        auto p = simulate(truth.field, cfg.model.x0, T, cfg.discretization.delta, cfg.discretization.seed);
        save(out.path, p);
        return p;
    });

    out.stats = (dir / "stats.bin").string();
    const SufficientStatistics stats = run_stage("stats", [&] {
        StatsOptions so;
        so.threads = opts.threads;
        auto s = sufficient_stats(path, basis_for(cfg, T), so);
        save(out.stats, s);
        return s;
    });

    out.posterior = (dir / "post.bin").string();
    const GaussianPosterior post = run_stage("fit", [&] {
        auto p = fit(stats, prior_for(cfg, T));
        save(out.posterior, p);
        return p;
    });

    run_stage("report", [&] {
        const int d = cfg.model.d;
        const int n = d == 1 ? band_grid_points(post.spec()) : d == 2 ? 32 : 12;
        StudyReport fit_report;
        fit_report.study = "fit";
        fit_report.tables.push_back(posterior_grid_table(post, truth, n));
        write_report(fit_report, reports.string());
        fs::remove(reports / "summary.txt");
        out.reports.push_back((reports / "fit.csv").string());
    });

    if (cfg.study) {
        const StudyReport rpt = run_stage("study", [&] { return run_study(cfg, "", opts.threads); });
        run_stage("report", [&] {
            const std::string prefix = rpt.study + "_";
            write_report(rpt, reports.string(), prefix);
            for (const auto& t : rpt.tables)
                out.reports.push_back((reports / (prefix + t.name + ".csv")).string());
            out.reports.push_back((reports / (prefix + "summary.txt")).string());
        });
    }
    return out;
}

} // namespace driftlab
