#pragma once
// Batch front door: flat dotted-key JSON config, subcommand pipelines,
// reports and snapshots.

#include <iosfwd>
#include <string>
#include <vector>

#include "fibreflow/analysis.hpp"
#include "fibreflow/flow.hpp"
#include "fibreflow/io.hpp"

namespace fibreflow {

struct LelongConfig {
    std::string source = "model";  // model | flow
    double lambda = 1.0;
    double smooth = 0.0;           // coefficient of |z - p|^2 added to the model
    cplx center{};
    double r_max = 0.25;
    int octaves = 8;
    int per_octave = 8;
    int n_theta = 64;
};

struct ModelsConfig {
    ModelKind kind = ModelKind::poincare;
    int n = 2;
    cplx t{1e-4, 0.0};
    std::vector<double> radii{0.05, 0.1, 0.2, 0.4};
};

struct RunConfig {
    std::string subcommand;
    FibrationSpec fibration;
    FlowConfig flow;
    std::vector<double> epsilons{0.1, 0.05, 0.025};
    LelongConfig lelong;
    ModelsConfig models;
    bool volume_weighted = false;
    std::string foliation_form = "srf_fiber";  // srf | srf_fiber | base
    KernelSubspace foliation_subspace = KernelSubspace::full;
    bool bmy_override = false;
    std::string bmy_region = "whole";          // whole | collar
    int bmy_l0 = 0, bmy_l1 = -1;
    bool snapshots = false;
    json effective;  // the flat config after command-line overrides
};

const std::vector<std::string>& subcommands();

/// Parses a flat dotted-key config object; unknown keys and bad values raise ConfigError.
RunConfig parse_config(const std::string& subcommand, const json& flat);

/// Runs one subcommand pipeline and returns its report. Numeric failures
/// inside the pipeline are recorded in the report status where a partial
/// result exists; otherwise they propagate.
Report run_pipeline(const RunConfig& cfg, const std::filesystem::path& snapshot_dir);

json make_manifest(const RunConfig& cfg, bool deterministic, ReportFormat fmt);

/// Exit code 0 on success, 1 on numeric or solver failure, 2 on configuration error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fibreflow
