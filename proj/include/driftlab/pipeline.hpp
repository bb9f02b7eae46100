#pragma once

// simulate -> stats -> fit (-> study) orchestration with stage-tagged errors.

#include "driftlab/config.hpp"
#include "driftlab/error.hpp"
#include "driftlab/uq.hpp"

#include <exception>
#include <string>
#include <vector>

namespace driftlab {

/// Process exit codes: schema or format problems 2, numerical failures 3, I/O 4.
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// FormatError, ConfigError, ShapeError, PreconditionError -> 2; IoError -> 4;
/// everything else (numerical, simulation, statistics, unknown) -> 3.
int exit_code_for(const std::exception& e);

class StageError : public Error {
public:
    StageError(std::string stage, int code, const std::string& message)
        : Error("stage " + stage + ": " + message), stage_(std::move(stage)), code_(code)
    {
    }
    const std::string& stage() const { return stage_; }
    int code() const { return code_; }

private:
    std::string stage_;
    int code_;
};

/// Runs f, rethrowing any failure as a StageError carrying the stage name.
template <class F>
decltype(auto) run_stage(const std::string& stage, F&& f)
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, exit_code_for(e), e.what());
    }
}

struct PipelineOptions {
    int threads = 1;
};

struct PipelineArtifacts {
    std::string path;
    std::string stats;
    std::string posterior;
    std::string resolved;
    std::vector<std::string> reports;
};

/// Writes path.bin, stats.bin, post.bin, resolved.config and reports/*.csv into out_dir.
/// Without a study block the report is reports/fit.csv (posterior mean, pointwise
/// posterior sd and truth on a grid).
PipelineArtifacts run_pipeline(const RunConfig& cfg, const std::string& out_dir, const PipelineOptions& opts = {});

/// Study named by cfg.study (or `kind` when non-empty).
StudyReport run_study(const RunConfig& cfg, const std::string& kind = "", int threads = 1);

/// Pointwise posterior summary on the grid {i/n}^d: columns x_1..x_d, then for
/// each component mean_j, sd_j, truth_j.
Table posterior_grid_table(const GaussianPosterior& post, const DriftModel& truth, int n);

} // namespace driftlab
