#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dualex/dual.hpp"
#include "dualex/fusion.hpp"
#include "dualex/solver.hpp"

namespace dualex {

struct PipelineConfig {
    IlluminationParams illum;
    SolverSettings solver;
    FusionParams fusion;
    std::filesystem::path input;
    std::filesystem::path output;
    bool save_intermediates = false;

    void validate() const;
};

struct RunReport {
    std::filesystem::path input;
    std::filesystem::path output;
    int width = 0;
    int height = 0;
    double illum_forward_seconds = 0.0;
    double illum_reverse_seconds = 0.0;
    double fusion_seconds = 0.0;
    double total_seconds = 0.0;
    SolveStats forward;
    SolveStats reverse;
    bool ok = true;
    std::string error;

    std::string to_json(const PipelineConfig& config) const;
};

struct BatchReport {
    std::vector<RunReport> reports;
    int succeeded = 0;
    int failed = 0;

    std::string summary_json() const;
};

/// Correct one image: load, dual estimation, fusion, save. Writes the fused
/// PNG (plus intermediates when requested) and returns the timing report.
RunReport run_single(const PipelineConfig& config);

/// Correct every supported file in config.input (a directory), writing PNGs
/// with mirrored names into config.output. Per-file failures are recorded in
/// the report and do not abort the batch. `emit` (when set) receives each
/// per-image report line as it completes.
BatchReport run_batch(const PipelineConfig& config,
                      void (*emit)(const std::string&) = nullptr);

/// Thrown by parse_args when --help is requested; carries the usage text.
struct HelpRequested {
    std::string text;
};

/// Parse CLI flags (without the program name). Throws ArgumentError on
/// unknown flags or invalid values, naming the offending flag.
PipelineConfig parse_args(const std::vector<std::string>& args);

/// Full tool entry point: parse, dispatch to single/batch, print JSON reports
/// to stdout and diagnostics to stderr. Returns the process exit code
/// (0 ok, 1 usage, 2 I/O, 3 solver non-convergence).
int run_cli(int argc, const char* const* argv);

}  // namespace dualex
