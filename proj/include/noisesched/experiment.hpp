#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "noisesched/analysis.hpp"
#include "noisesched/integrator.hpp"
#include "noisesched/limits.hpp"
#include "noisesched/oracle.hpp"

namespace noisesched {

using Json = nlohmann::ordered_json;

struct ExperimentConfig {
  std::string name;
  SimulationConfig sim;
  std::filesystem::path output_dir = ".";
  Json source;  // the config document after overrides
};

/// A dotted key ("run.d") and its raw command-line value.
using Override = std::pair<std::string, std::string>;

/// Parses JSON text; syntax errors are reported as ConfigError with line and column.
Json parse_config_text(const std::string& text, const std::string& origin = "<config>");
Json load_config_file(const std::filesystem::path& path);

/// Sets a dotted key. The value is read as JSON when possible and as a string otherwise.
void apply_override(Json& doc, const Override& override_kv);

/// Validates every block and builds the experiment. Throws ConfigError.
ExperimentConfig build_experiment(const Json& doc);

struct ArtifactPaths {
  std::filesystem::path magnetization;
  std::filesystem::path coords;
  std::filesystem::path report;
};

/// Writes <name>.magnetization.csv, <name>.coords.csv and <name>.report.json.
/// Files already written are removed when a later write fails.
ArtifactPaths write_artifacts(const ExperimentConfig& experiment, const TrajectoryBatch& batch,
                              const FeatureReport& report);

/// Simulates and writes artifacts. Partial outputs are removed on failure.
ArtifactPaths run_experiment(const ExperimentConfig& experiment, FeatureReport* report_out = nullptr);

Json report_to_json(const ExperimentConfig& experiment, const FeatureReport& report);
Json validation_to_json(const ValidationReport& report);

/// Shortest decimal with 17 significant digits.
std::string format_double(double v);

struct SweepRow {
  std::string axis_value;
  double p_hat = 0.0;
  double p_hat_se = 0.0;
  double sigma_hat2_final = 0.0;
  double tau_s = 0.0;
  double t_s = 0.0;
  std::string status;  // "ok" or the error message
};

/// One run per value with the axis key overridden; failures are recorded and the sweep continues.
/// Writes <name>.sweep.csv to the template's output directory.
std::vector<SweepRow> run_sweep(const Json& template_doc, const std::string& axis,
                                const std::vector<std::string>& values,
                                std::filesystem::path* aggregate_path = nullptr);

struct LimitRunOptions {
  LimitKind kind = LimitKind::ve_dilated_phase1_M;
  LimitParams params;
  std::int64_t n_members = 1000;
  std::uint64_t seed = 0;
  double delta_t = 0.01;
  double t0 = 0.0;
  double t1 = 0.0;
  bool fixed_initial = false;
  double initial = 0.0;
  std::string name = "limit";
  std::filesystem::path output_dir = ".";
};

struct LimitRunResult {
  LimitEnsemble ensemble;
  Json summary;
  std::filesystem::path csv;
  std::filesystem::path json;
};

LimitRunResult run_limit(const LimitRunOptions& options);

}  // namespace noisesched
