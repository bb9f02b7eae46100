#pragma once

// Run configuration: one JSON document with the blocks model, discretization,
// basis, solver and (optionally) study. Unknown keys are rejected with their
// dotted path; every key has a default, and resolved_config() echoes the
// document with all defaults filled in. The only environment input is
// DRIFTLAB_SEED, which replaces discretization.seed.

#include "driftlab/basis.hpp"
#include "driftlab/drift_presets.hpp"
#include "driftlab/uq.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace driftlab {

struct DriftConfig {
    std::string preset = "zero";
    double amplitude = 0.5;
    /// DLCF coefficient file; overrides the preset when set. Relative to the config file.
    std::string file;
};

struct ModelConfig {
    int d = 1;
    DriftConfig drift;
    Point x0{0, 0, 0};
};

struct DiscretizationConfig {
    double T = 100.0;
    double delta = 1e-3;
    std::uint64_t seed = 1;
};

struct BasisConfig {
    Family family = Family::Daubechies;
    int S = 6;
    /// Fixed level; otherwise J = round(log2 T / (2a + d)).
    std::optional<int> J;
    double alpha = 0.0;
    double a = 2.0;
    int cascade_depth = kDefaultCascadeDepth;
};

/// Dense Galerkin solves cost (2K+1)^{3d}; d = 3 drops to K = 8 unless set explicitly.
inline int default_solver_K(int d) { return d == 3 ? 8 : 32; }

struct SolverConfig {
    int K = 32;
    int oversample = 3;
};

struct StudyBlock {
    /// rate, bvm, invariant, coverage, delta, ergodic or isometry.
    std::string kind = "rate";
    std::vector<double> horizons{250.0, 1000.0, 4000.0};
    int replications = 20;
    std::optional<double> smoothness;
    std::string norm = "l2";
    std::vector<std::string> functionals{"cos", "sin"};
    int coordinate = 0;
    std::string test_function = "cos";
    int draws = 200;
    double level = 0.9;
    int band_draws = 200;
    std::vector<double> scales{0.2, 0.1, 0.05};
    std::string direction = "cos";
};

struct RunConfig {
    ModelConfig model;
    DiscretizationConfig discretization;
    BasisConfig basis;
    SolverConfig solver;
    std::optional<StudyBlock> study;
    /// Directory used to resolve relative file references.
    std::string base_dir = ".";

    void validate() const;
};

/// ConfigError names the offending key, e.g. "basis.alpha: must be >= 0".
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
/// Reads the file (IoError if unreadable), parses it and applies DRIFTLAB_SEED.
RunConfig load_config(const std::string& file);
void apply_seed_override(RunConfig& cfg);

/// Canonical JSON text with every default materialised.
std::string resolved_config(const RunConfig& cfg);

DriftModel resolve_drift(const RunConfig& cfg);
PriorSpec prior_for(const RunConfig& cfg, double T);
BasisSpec basis_for(const RunConfig& cfg, double T);
StudyConfig study_config(const RunConfig& cfg);

/// cos, sin, cos2, sin2, one, zero of x_axis; "cos:1" selects axis 1 (default 0).
TestFunction named_test_function(const std::string& name, int d);

} // namespace driftlab
