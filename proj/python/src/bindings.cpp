#include "driftlab/config.hpp"
#include "driftlab/drift_presets.hpp"
#include "driftlab/elliptic.hpp"
#include "driftlab/error.hpp"
#include "driftlab/green1d.hpp"
#include "driftlab/io.hpp"
#include "driftlab/likelihood.hpp"
#include "driftlab/pipeline.hpp"
#include "driftlab/posterior.hpp"
#include "driftlab/sde.hpp"
#include "driftlab/uq.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstring>

namespace py = pybind11;
using namespace driftlab;

namespace {

Point to_point(const std::vector<double>& v)
{
    if (v.size() > static_cast<std::size_t>(kMaxDim))
        throw ShapeError("point has more than " + std::to_string(kMaxDim) + " coordinates");
    Point p{0, 0, 0};
    std::copy(v.begin(), v.end(), p.begin());
    return p;
}

py::array_t<double> point_array(const Point& p, int d)
{
    py::array_t<double> out(d);
    std::copy(p.begin(), p.begin() + d, out.mutable_data());
    return out;
}

/// Wraps a Python callable x -> b(x); callbacks may arrive from worker threads.
VectorField callable_field(py::function f, int d)
{
    auto holder = std::make_shared<py::function>(std::move(f));
    return {d, [holder, d](const Point& x) {
                py::gil_scoped_acquire gil;
                const auto r = (*holder)(point_array(x, d)).cast<std::vector<double>>();
                if (static_cast<int>(r.size()) != d)
                    throw ShapeError("drift callable returned " + std::to_string(r.size()) +
                                     " values, expected " + std::to_string(d));
                return to_point(r);
            }};
}

ScalarField callable_scalar(py::function f, int d)
{
    auto holder = std::make_shared<py::function>(std::move(f));
    return {d, [holder, d](const Point& x) {
                py::gil_scoped_acquire gil;
                return (*holder)(point_array(x, d)).cast<double>();
            }};
}

/// Accepts a DriftModel, a CoefficientField or a callable (which needs `dim`).
VectorField as_field(const py::object& drift, std::optional<int> dim)
{
    if (py::isinstance<DriftModel>(drift))
        return drift.cast<const DriftModel&>().field;
    if (py::isinstance<CoefficientField>(drift))
        return FieldEvaluator(drift.cast<const CoefficientField&>()).as_vector_field();
    if (py::isinstance<py::function>(drift)) {
        if (!dim)
            throw ConfigError("a callable drift needs dim=");
        return callable_field(drift.cast<py::function>(), *dim);
    }
    throw ConfigError("drift must be a DriftModel, CoefficientField or callable");
}

py::array_t<double> positions_array(const DiffusionPath& p)
{
    const auto pos = p.positions();
    py::array_t<double> out({static_cast<py::ssize_t>(p.n_steps() + 1), static_cast<py::ssize_t>(p.dim())});
    std::memcpy(out.mutable_data(), pos.data(), pos.size() * sizeof(double));
    return out;
}

py::dict report_dict(const StudyReport& r)
{
    py::dict metrics, checks, tables;
    for (const auto& [k, v] : r.metrics)
        metrics[py::str(k)] = v;
    for (const auto& [k, v] : r.checks)
        checks[py::str(k)] = v;
    for (const auto& t : r.tables)
        tables[py::str(t.name)] = py::make_tuple(t.columns, t.rows);
    py::dict out;
    out["study"] = r.study;
    out["config_hash"] = r.config_hash;
    out["seed"] = r.seed;
    out["metrics"] = metrics;
    out["checks"] = checks;
    out["tables"] = tables;
    out["warnings"] = r.warnings;
    out["passed"] = r.passed();
    out["summary"] = r.summary();
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Bayesian drift inference for periodic diffusions";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<ShapeError>(m, "ShapeError", base);
    py::register_exception<SimulationError>(m, "SimulationError", base);
    py::register_exception<PreconditionError>(m, "PreconditionError", base);
    py::register_exception<NumericalError>(m, "NumericalError", base);
    py::register_exception<StatisticsError>(m, "StatisticsError", base);
    auto io_error = py::register_exception<IoError>(m, "IoError", base);
    py::register_exception<FormatError>(m, "FormatError", io_error);
    py::register_exception<StageError>(m, "StageError", base);

    // basis

    py::enum_<Family>(m, "Family").value("Haar", Family::Haar).value("Daubechies", Family::Daubechies);
    py::enum_<Coords>(m, "Coords")
        .value("ScalingLevelJ", Coords::ScalingLevelJ)
        .value("Multiresolution", Coords::Multiresolution);

    py::class_<BasisSpec>(m, "BasisSpec")
        .def_property_readonly("family", &BasisSpec::family)
        .def_property_readonly("vanishing_moments", &BasisSpec::vanishing_moments)
        .def_property_readonly("level", &BasisSpec::level)
        .def_property_readonly("dim", &BasisSpec::dim)
        .def_property_readonly("size", &BasisSpec::size)
        .def_property_readonly("hash", &BasisSpec::hash)
        .def("scaling", &BasisSpec::scaling, py::arg("r"), py::arg("x"))
        .def("__eq__", &BasisSpec::operator==)
        .def("__repr__", &BasisSpec::describe);
    m.def("build_basis", &build_basis, py::arg("family"), py::arg("J"), py::arg("d"), py::arg("S") = 0,
          py::arg("cascade_depth") = kDefaultCascadeDepth);

    py::class_<CoefficientField>(m, "CoefficientField")
        .def(py::init<BasisSpec, Coords, Eigen::MatrixXd>(), py::arg("spec"), py::arg("coords"), py::arg("values"))
        .def_property_readonly("spec", &CoefficientField::spec)
        .def_property_readonly("coords", &CoefficientField::coords)
        .def_property_readonly("values", [](const CoefficientField& c) -> Eigen::MatrixXd { return c.values(); })
        .def("to_coords", [](const CoefficientField& c, Coords k) { return to_coords(c, k); })
        .def("__call__", [](const CoefficientField& c, const std::vector<double>& x) {
            return point_array(synthesize(c, to_point(x)), c.components());
        });
    m.def(
        "project",
        [](const BasisSpec& spec, py::function f, int components, Coords coords) {
            if (components == 1)
                return project(spec, callable_scalar(std::move(f), spec.dim()), coords);
            if (components != spec.dim())
                throw ShapeError("components must be 1 or the basis dimension");
            return project(spec, callable_field(std::move(f), spec.dim()), coords);
        },
        py::arg("spec"), py::arg("f"), py::arg("components") = 1, py::arg("coords") = Coords::Multiresolution);

    py::class_<PriorSpec>(m, "PriorSpec")
        .def(py::init([](double alpha, double a, int level, int dim) {
                 PriorSpec p{alpha, a, level, dim};
                 p.validate();
                 return p;
             }),
             py::arg("alpha"), py::arg("a"), py::arg("level"), py::arg("dim") = 1)
        .def_static("from_horizon", &PriorSpec::from_horizon, py::arg("alpha"), py::arg("a"), py::arg("T"),
                    py::arg("d"))
        .def_readonly("alpha", &PriorSpec::alpha)
        .def_readonly("a", &PriorSpec::a)
        .def_readonly("level", &PriorSpec::level)
        .def_readonly("dim", &PriorSpec::dim);

    // drifts

    py::class_<DriftModel>(m, "DriftModel")
        .def_readonly("description", &DriftModel::description)
        .def_readonly("dim", &DriftModel::dim)
        .def_property_readonly("hash", &DriftModel::hash)
        .def_property_readonly("has_potential", [](const DriftModel& d) { return d.potential.has_value(); })
        .def("__call__",
             [](const DriftModel& d, const std::vector<double>& x) { return point_array(d(to_point(x)), d.dim); })
        .def("__repr__", [](const DriftModel& d) { return "<DriftModel " + d.description + ">"; });
    m.def("drift_preset_names", &drift_preset_names);
    m.def("drift_preset", &drift_preset, py::arg("name"), py::arg("d"), py::arg("amplitude") = 0.5);
    m.def("drift_from_coefficients", &drift_from_coefficients, py::arg("coefficients"));

    // simulation and likelihood

    py::class_<DiffusionPath>(m, "DiffusionPath")
        .def_property_readonly("dim", &DiffusionPath::dim)
        .def_property_readonly("delta", &DiffusionPath::delta)
        .def_property_readonly("n_steps", &DiffusionPath::n_steps)
        .def_property_readonly("horizon", &DiffusionPath::horizon)
        .def_property_readonly("seed", &DiffusionPath::seed)
        .def_property_readonly("hash", &DiffusionPath::hash)
        .def_property_readonly("positions", &positions_array);
    m.def(
        "simulate",
        [](const py::object& drift, double T, double delta, std::uint64_t seed, std::vector<double> x0,
           std::optional<int> dim) {
            const VectorField b = as_field(drift, dim);
            if (x0.empty())
                x0.assign(static_cast<std::size_t>(b.dim), 0.0);
            if (static_cast<int>(x0.size()) != b.dim)
                throw ShapeError("x0 has " + std::to_string(x0.size()) + " coordinates, drift has dimension " +
                                 std::to_string(b.dim));
            py::gil_scoped_release release;
            return simulate(b, to_point(x0), T, delta, seed);
        },
        py::arg("drift"), py::arg("T"), py::arg("delta"), py::arg("seed"), py::arg("x0") = std::vector<double>{},
        py::arg("dim") = py::none());

    py::class_<SufficientStatistics>(m, "SufficientStatistics")
        .def_readonly("spec", &SufficientStatistics::spec)
        .def_readonly("T", &SufficientStatistics::T)
        .def_readonly("delta", &SufficientStatistics::delta)
        .def_readonly("gram", &SufficientStatistics::gram)
        .def_readonly("m", &SufficientStatistics::m)
        .def_readonly("path_hash", &SufficientStatistics::path_hash)
        .def_property_readonly("hash", &SufficientStatistics::hash);
    m.def(
        "sufficient_stats",
        [](const DiffusionPath& p, const BasisSpec& spec, int threads) {
            py::gil_scoped_release release;
            return sufficient_stats(p, spec, StatsOptions{threads});
        },
        py::arg("path"), py::arg("spec"), py::arg("threads") = 1);
    m.def("log_likelihood", py::overload_cast<const DiffusionPath&, const CoefficientField&>(&log_likelihood),
          py::arg("path"), py::arg("b"));
    m.def("log_likelihood",
          py::overload_cast<const SufficientStatistics&, const CoefficientField&>(&log_likelihood),
          py::arg("stats"), py::arg("b"));
    m.def("hellinger_distance", &hellinger_distance, py::arg("stats"), py::arg("b1"), py::arg("b2"));
    m.def(
        "lan_decomposition",
        [](const DiffusionPath& p, const CoefficientField& b0, const CoefficientField& h) {
            const LanTerms t = lan_decomposition(p, b0, h);
            py::dict d;
            d["ell_b0"] = t.ell_b0;
            d["ell_shifted"] = t.ell_shifted;
            d["W"] = t.W;
            d["quad"] = t.quad;
            d["residual"] = t.residual;
            return d;
        },
        py::arg("path"), py::arg("b0"), py::arg("h"));

    // posterior

    py::class_<GaussianPosterior>(m, "GaussianPosterior")
        .def_property_readonly("spec", &GaussianPosterior::spec)
        .def_property_readonly("prior", &GaussianPosterior::prior)
        .def_property_readonly("horizon", &GaussianPosterior::horizon)
        .def_property_readonly("precision", &GaussianPosterior::precision)
        .def_property_readonly("mean", &GaussianPosterior::mean)
        .def_property_readonly("stats_hash", &GaussianPosterior::stats_hash)
        .def_property_readonly("hash", &GaussianPosterior::hash)
        .def("covariance", &GaussianPosterior::covariance)
        .def("normal_equation_residual", &GaussianPosterior::normal_equation_residual);
    m.def("fit", &fit, py::arg("stats"), py::arg("prior"));
    m.def(
        "sample",
        [](const GaussianPosterior& post, std::size_t n, std::uint64_t seed, int threads) {
            std::vector<CoefficientField> draws;
            {
                py::gil_scoped_release release;
                draws = sample(post, n, seed, SampleOptions{threads});
            }
            const auto v = static_cast<py::ssize_t>(post.spec().size());
            const auto d = static_cast<py::ssize_t>(post.dim());
            // (n, v, d) multiresolution coefficients
            py::array_t<double> out({static_cast<py::ssize_t>(n), v, d});
            auto a = out.mutable_unchecked<3>();
            for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(n); ++i)
                for (py::ssize_t r = 0; r < v; ++r)
                    for (py::ssize_t j = 0; j < d; ++j)
                        a(i, r, j) = draws[static_cast<std::size_t>(i)].values()(r, j);
            return out;
        },
        py::arg("posterior"), py::arg("n"), py::arg("seed"), py::arg("threads") = 1);
    m.def(
        "functional_moments",
        [](const GaussianPosterior& post, const CoefficientField& phi, int j) {
            const FunctionalMoments f = functional_moments(post, phi, j);
            return py::make_tuple(f.mean, f.variance);
        },
        py::arg("posterior"), py::arg("phi"), py::arg("component") = 0);

    // elliptic

    py::class_<FourierField>(m, "FourierField")
        .def_property_readonly("dim", &FourierField::dim)
        .def_property_readonly("K", &FourierField::K)
        .def_property_readonly("mean", &FourierField::mean)
        .def_property_readonly("coeffs",
                               [](const FourierField& f) {
                                   const auto c = f.coeffs();
                                   return py::array_t<cplx>(static_cast<py::ssize_t>(c.size()), c.data());
                               })
        .def("l2_norm", &FourierField::l2_norm)
        .def("grid_values", &FourierField::grid_values, py::arg("n"))
        .def("__call__", [](const FourierField& f, const std::vector<double>& x) { return f.evaluate(to_point(x)); })
        .def_static(
            "from_function",
            [](py::function f, int d, int K, int oversample) {
                const ScalarField g = callable_scalar(std::move(f), d);
                return FourierField::from_function(g, K, oversample);
            },
            py::arg("f"), py::arg("d"), py::arg("K"), py::arg("oversample") = 3);

    py::class_<InvariantMeasure>(m, "InvariantMeasure")
        .def_readonly("density", &InvariantMeasure::density)
        .def_readonly("min_grid_value", &InvariantMeasure::min_grid_value)
        .def_readonly("rcond", &InvariantMeasure::rcond)
        .def_readonly("warnings", &InvariantMeasure::warnings)
        .def("__call__", [](const InvariantMeasure& mu, const std::vector<double>& x) { return mu(to_point(x)); });

    m.def(
        "invariant_measure",
        [](const py::object& drift, int K, int oversample, std::optional<int> dim) {
            const VectorField b = as_field(drift, dim);
            py::gil_scoped_release release;
            return invariant_measure(b, K, oversample);
        },
        py::arg("drift"), py::arg("K"), py::arg("oversample") = kDefaultOversample, py::arg("dim") = py::none());
    m.def("center", &center, py::arg("f"), py::arg("mu"));
    m.def(
        "solve_poisson",
        [](const py::object& drift, const FourierField& f, const InvariantMeasure& mu, bool centre, int oversample,
           std::optional<int> dim) {
            const VectorField b = as_field(drift, dim);
            py::gil_scoped_release release;
            return solve_poisson(b, centre ? center(f, mu) : f, mu, {}, oversample);
        },
        py::arg("drift"), py::arg("f"), py::arg("mu"), py::arg("center") = true,
        py::arg("oversample") = kDefaultOversample, py::arg("dim") = py::none());
    m.def(
        "invariant_1d_flux",
        [](const py::object& drift, int K) {
            const FluxSolution s = invariant_1d_flux(as_field(drift, 1), K);
            return py::make_tuple(s.flux, s.grid);
        },
        py::arg("drift"), py::arg("K"));
    m.def(
        "green_kernel_1d",
        [](const py::object& drift, double x, int grid_points) {
            return green_kernel_1d(as_field(drift, 1), x, grid_points).values;
        },
        py::arg("drift"), py::arg("x"), py::arg("grid_points") = 1 << 14);

    // artifacts

    m.def("save", &save<DiffusionPath>, py::arg("file"), py::arg("path"));
    m.def("save", &save<SufficientStatistics>, py::arg("file"), py::arg("stats"));
    m.def("save", &save<GaussianPosterior>, py::arg("file"), py::arg("posterior"));
    m.def("save", &save<CoefficientField>, py::arg("file"), py::arg("coefficients"));
    m.def("save", &save<FourierField>, py::arg("file"), py::arg("field"));
    m.def("load_path", &load_path, py::arg("file"));
    m.def("load_stats", &load_stats, py::arg("file"));
    m.def("load_posterior", &load_posterior, py::arg("file"));
    m.def("load_coefficients", &load_coefficients, py::arg("file"));
    m.def("load_fourier", &load_fourier, py::arg("file"));
    m.def("describe_artifacts", &describe_artifacts, py::arg("files"));

    // configuration and pipeline

    py::class_<RunConfig>(m, "RunConfig").def("resolved", [](const RunConfig& c) { return resolved_config(c); });
    m.def("parse_config", &parse_config, py::arg("text"), py::arg("base_dir") = ".");
    m.def("load_config", &load_config, py::arg("file"));
    m.def(
        "run_pipeline",
        [](const RunConfig& cfg, const std::string& out_dir, int threads) {
            PipelineArtifacts a;
            {
                py::gil_scoped_release release;
                a = run_pipeline(cfg, out_dir, PipelineOptions{threads});
            }
            py::dict d;
            d["path"] = a.path;
            d["stats"] = a.stats;
            d["posterior"] = a.posterior;
            d["resolved"] = a.resolved;
            d["reports"] = a.reports;
            return d;
        },
        py::arg("config"), py::arg("out_dir"), py::arg("threads") = 1);
    m.def(
        "run_study",
        [](const RunConfig& cfg, const std::string& kind, int threads) {
            StudyReport r;
            {
                py::gil_scoped_release release;
                r = run_study(cfg, kind, threads);
            }
            return report_dict(r);
        },
        py::arg("config"), py::arg("kind") = "", py::arg("threads") = 1);
}
