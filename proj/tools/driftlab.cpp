// driftlab command-line interface.

#include "driftlab/config.hpp"
#include "driftlab/drift_presets.hpp"
#include "driftlab/elliptic.hpp"
#include "driftlab/io.hpp"
#include "driftlab/likelihood.hpp"
#include "driftlab/pipeline.hpp"
#include "driftlab/posterior.hpp"
#include "driftlab/sde.hpp"
#include "driftlab/uq.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

using namespace driftlab;

namespace {

struct Global {
    int threads = 1;
    bool deterministic = true;
    std::optional<std::uint64_t> seed;
};

RunConfig config_with_seed(const std::string& file, const Global& g)
{
    RunConfig cfg = load_config(file);
    if (g.seed)
        cfg.discretization.seed = *g.seed;
    return cfg;
}

/// Drift from a coefficient file, a preset or a config file (first one given).
struct DriftSource {
    std::string file;
    std::string preset;
    double amplitude = 0.5;
    int dim = 1;
    std::string config;

    DriftModel resolve() const
    {
        if (!file.empty())
            return drift_from_coefficients(load_coefficients(file));
        if (!preset.empty())
            return drift_preset(preset, dim, amplitude);
        if (!config.empty())
            return resolve_drift(load_config(config));
        throw ConfigError("--drift: one of --drift, --preset or --config is required");
    }

    void add_options(CLI::App* app)
    {
        app->add_option("--drift", file, "Drift coefficient file (DLCF)");
        app->add_option("--preset", preset, "Drift preset name");
        app->add_option("--amplitude", amplitude, "Preset amplitude");
        app->add_option("--dim", dim, "Preset dimension")->check(CLI::Range(1, 3));
        app->add_option("--config", config, "Take the drift from a run configuration");
    }
};

/// --rhs: cos, sin, cos2, sin2 (optionally ":axis"), box:lo,hi (first axis) or a DLFF file.
FourierField parse_rhs(const std::string& spec, int d, int K)
{
    if (spec.rfind("box:", 0) == 0) {
        const std::string body = spec.substr(4);
        const auto comma = body.find(',');
        if (comma == std::string::npos)
            throw ConfigError("--rhs: box needs \"box:lo,hi\"");
        Point lo{0, 0, 0}, hi{1, 1, 1};
        try {
            lo[0] = std::stod(body.substr(0, comma));
            hi[0] = std::stod(body.substr(comma + 1));
        } catch (const std::exception&) {
            throw ConfigError("--rhs: cannot parse box bounds in \"" + spec + "\"");
        }
        return FourierField::box_indicator(d, K, lo, hi);
    }
    if (std::filesystem::exists(spec)) {
        FourierField f = load_fourier(spec);
        if (f.dim() != d)
            throw ShapeError("--rhs: Fourier field dimension does not match the drift");
        return f.resized(K);
    }
    return FourierField::from_function(named_test_function(spec, d).fn, K);
}

void print_report(const StudyReport& r, const std::string& out_dir)
{
    write_report(r, out_dir, r.study + "_");
    std::cout << r.summary();
    std::cout << "reports written to " << out_dir << "\n";
}

int run(int argc, char** argv)
{
    CLI::App app{"driftlab: Bayesian drift inference for periodic diffusions"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--deterministic,!--no-deterministic", g.deterministic,
                 "Ordered reductions (always on; the flag is accepted for compatibility)");
    app.add_option("--seed", g.seed, "Override the RNG seed");

    // simulate
    std::string config, out, out_dir;
    auto* sim = app.add_subcommand("simulate", "Simulate a path");
    sim->add_option("--config", config, "Run configuration")->required();
    sim->add_option("--out", out, "Output path file")->required();

    // stats
    std::string path_file, basis_cfg;
    auto* st = app.add_subcommand("stats", "Sufficient statistics of a path");
    st->add_option("--path", path_file, "Path file")->required();
    st->add_option("--basis", basis_cfg, "Configuration providing the basis block")->required();
    st->add_option("--out", out, "Output stats file")->required();

    // fit
    std::string stats_file, prior_cfg;
    auto* ft = app.add_subcommand("fit", "Gaussian posterior from statistics");
    ft->add_option("--stats", stats_file, "Stats file")->required();
    ft->add_option("--prior", prior_cfg, "Configuration providing the prior (basis block)")->required();
    ft->add_option("--out", out, "Output posterior file")->required();

    // sample
    std::string post_file;
    std::size_t n_draws = 1000;
    auto* sm = app.add_subcommand("sample", "Posterior draws as CSV (multiresolution coefficients)");
    sm->add_option("--post", post_file, "Posterior file")->required();
    sm->add_option("-n", n_draws, "Number of draws")->check(CLI::PositiveNumber);
    sm->add_option("--out", out, "CSV file (default stdout)");

    // invariant
    DriftSource drift;
    int K = 0, oversample = kDefaultOversample;
    auto* inv = app.add_subcommand("invariant", "Invariant density of a drift");
    drift.add_options(inv);
    inv->add_option("-K", K, "Fourier truncation (default 32, or 8 when d = 3)")->check(CLI::Range(1, 1024));
    inv->add_option("--oversample", oversample, "Grid oversampling")->check(CLI::Range(3, 16));
    inv->add_option("--out", out, "Output Fourier file (DLFF)");

    // poisson
    DriftSource pdrift;
    std::string rhs = "cos";
    bool no_center = false;
    auto* po = app.add_subcommand("poisson", "Solve L u = f - int f dmu");
    pdrift.add_options(po);
    po->add_option("--rhs", rhs, "cos|sin|cos2|sin2[:axis], box:lo,hi, or a DLFF file");
    po->add_option("-K", K, "Fourier truncation (default 32, or 8 when d = 3)")->check(CLI::Range(1, 1024));
    po->add_option("--oversample", oversample, "Grid oversampling")->check(CLI::Range(3, 16));
    po->add_flag("--no-center", no_center, "Require int f dmu = 0 instead of centring");
    po->add_option("--out", out, "Output Fourier file (DLFF)");

    // study
    auto* sy = app.add_subcommand("study", "Monte Carlo studies");
    sy->require_subcommand(1);
    sy->fallthrough();
    std::vector<std::pair<std::string, CLI::App*>> kinds;
    for (const char* k : {"rate", "bvm", "invariant", "coverage", "delta", "ergodic", "isometry"}) {
        auto* s = sy->add_subcommand(k, std::string(k) + " study");
        s->add_option("--config", config, "Run configuration")->required();
        s->add_option("--out-dir", out_dir, "Report directory")->required();
        kinds.emplace_back(k, s);
    }

    // describe
    std::vector<std::string> files;
    auto* de = app.add_subcommand("describe", "Summarise artifacts and verify their provenance chain");
    de->add_option("files", files, "Artifact files")->required();

    // run
    auto* rn = app.add_subcommand("run", "Full pipeline: simulate, stats, fit, study");
    rn->add_option("--config", config, "Run configuration")->required();
    rn->add_option("--out-dir", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitSchema;
    }

    if (sim->parsed()) {
        const RunConfig cfg = config_with_seed(config, g);
        const DriftModel b = run_stage("model", [&] { return resolve_drift(cfg); });
        const DiffusionPath p = run_stage("simulate", [&] {
            return simulate(b.field, cfg.model.x0, cfg.discretization.T, cfg.discretization.delta,
                            cfg.discretization.seed);
        });
        run_stage("write", [&] { save(out, p); });
        std::cout << describe_artifacts({out});
    } else if (st->parsed()) {
        const DiffusionPath p = run_stage("read", [&] { return load_path(path_file); });
        const RunConfig cfg = load_config(basis_cfg);
        if (cfg.model.d != p.dim())
            throw ConfigError("model.d: configuration has d=" + std::to_string(cfg.model.d) + " but the path has d=" +
                              std::to_string(p.dim()));
        const auto s = run_stage("stats", [&] {
            StatsOptions so;
            so.threads = g.threads;
            return sufficient_stats(p, basis_for(cfg, p.horizon()), so);
        });
        run_stage("write", [&] { save(out, s); });
        std::cout << describe_artifacts({out});
    } else if (ft->parsed()) {
        const SufficientStatistics s = run_stage("read", [&] { return load_stats(stats_file); });
        const RunConfig cfg = load_config(prior_cfg);
        if (cfg.basis.J && *cfg.basis.J != s.spec.level())
            throw ConfigError("basis.J: configuration has J=" + std::to_string(*cfg.basis.J) +
                              " but the statistics use J=" + std::to_string(s.spec.level()));
        const PriorSpec prior{cfg.basis.alpha, cfg.basis.a, s.spec.level(), s.spec.dim()};
        const auto post = run_stage("fit", [&] { return fit(s, prior); });
        run_stage("write", [&] { save(out, post); });
        std::cout << describe_artifacts({out});
    } else if (sm->parsed()) {
        const GaussianPosterior post = run_stage("read", [&] { return load_posterior(post_file); });
        const std::uint64_t seed = g.seed.value_or(1);
        SampleOptions so;
        so.threads = g.threads;
        const auto draws = run_stage("sample", [&] { return sample(post, n_draws, seed, so); });
        std::ofstream file;
        if (!out.empty()) {
            file.open(out, std::ios::binary | std::ios::trunc);
            if (!file)
                throw IoError("cannot open " + out + " for writing");
        }
        std::ostream& os = out.empty() ? std::cout : file;
        os << "draw,component,index,value\n" << std::setprecision(17);
        for (std::size_t i = 0; i < draws.size(); ++i)
            for (int j = 0; j < draws[i].components(); ++j)
                for (Eigen::Index r = 0; r < draws[i].values().rows(); ++r)
                    os << i << "," << j << "," << r << "," << draws[i].values()(r, j) << "\n";
        if (!os)
            throw IoError("write failed for draws");
    } else if (inv->parsed()) {
        const DriftModel b = run_stage("model", [&] { return drift.resolve(); });
        if (K == 0)
            K = default_solver_K(b.dim);
        const InvariantMeasure mu = run_stage("invariant", [&] { return invariant_measure(b.field, K, oversample); });
        std::cout << std::setprecision(10) << "invariant d=" << b.dim << " K=" << K << " drift=" << b.description
                  << "\n  min grid density=" << mu.min_grid_value << " rcond=" << mu.rcond << "\n";
        if (b.dim == 1) {
            const auto flux = run_stage("flux", [&] { return invariant_1d_flux(b.field, K); });
            std::cout << "  stationary flux=" << flux.flux << "\n";
        }
        for (const auto& w : mu.warnings)
            std::cerr << "warning: " << w << "\n";
        if (!out.empty())
            run_stage("write", [&] { save(out, mu.density); });
    } else if (po->parsed()) {
        const DriftModel b = run_stage("model", [&] { return pdrift.resolve(); });
        if (K == 0)
            K = default_solver_K(b.dim);
        const FourierField f = parse_rhs(rhs, b.dim, K);
        const auto u = run_stage("poisson", [&] {
            const Generator gen(b.field, K, oversample);
            const InvariantMeasure mu = invariant_measure(gen);
            for (const auto& w : mu.warnings)
                std::cerr << "warning: " << w << "\n";
            const FourierField fc = no_center ? f : center(f, mu);
            auto sol = solve_poisson(gen, fc, mu);
            std::cout << std::setprecision(10) << "poisson d=" << b.dim << " K=" << K << " rhs=" << rhs
                      << "\n  int f dmu=" << f.inner(mu.density) << " |u|_L2=" << sol.l2_norm()
                      << " residual=" << (gen.apply(sol) - fc).l2_norm() << "\n";
            return sol;
        });
        if (!out.empty())
            run_stage("write", [&] { save(out, u); });
    } else if (sy->parsed()) {
        for (const auto& [kind, sub] : kinds)
            if (sub->parsed()) {
                const RunConfig cfg = config_with_seed(config, g);
                const StudyReport r = run_stage("study", [&] { return run_study(cfg, kind, g.threads); });
                run_stage("report", [&] { print_report(r, out_dir); });
            }
    } else if (de->parsed()) {
        std::cout << run_stage("describe", [&] { return describe_artifacts(files); });
    } else if (rn->parsed()) {
        const RunConfig cfg = config_with_seed(config, g);
        PipelineOptions po_opts;
        po_opts.threads = g.threads;
        const PipelineArtifacts a = run_pipeline(cfg, out_dir, po_opts);
        std::cout << describe_artifacts({a.path, a.stats, a.posterior});
        for (const auto& r : a.reports)
            std::cout << "report " << r << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "driftlab: error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
