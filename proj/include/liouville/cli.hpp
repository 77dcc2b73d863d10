#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "liouville/common.hpp"
#include "vendor_json.hpp"

namespace liouville::cli {

enum class Experiment { identities, kernels, reduction_scan, continuation };
std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name, const std::string& path = "experiment");

struct Tolerances {
  double quadrature = 1e-11;
  double contraction = 1e-11;
  double multiplier = 0.0;  // 0 selects 1e-9 * (2/3) pi alpha
};

// Parsed and validated run configuration. The original JSON (with defaults
// filled in) is kept for hashing and echoing into the outputs.
struct RunConfig {
  Experiment experiment = Experiment::identities;
  nlohmann::json domain = {{"kind", "unit_disk"}};
  nlohmann::json potential = {{"a0", 1.0}, {"grad", {0.0, 0.0}}, {"a11", 0.0}, {"a22", 0.0}};
  int N = 1;
  std::vector<double> lambda_ladder;
  std::vector<int> alphas = {1, 2, 3, 4};
  Complex xi{};
  std::vector<double> deltas = {0.4, 0.2, 0.1, 0.05};
  Complex b{};
  Tolerances tolerances;
  double nodes_per_delta = 16.0;
  double search_radius_factor = 2.0;
  bool force = false;
  bool write_fields = true;
  std::string output_dir = "out";

  nlohmann::json to_json() const;
};

// Throws UsageError naming the offending field path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
// Multiplies every tolerance by factor (> 0).
void scale_tolerances(RunConfig& config, double factor);

// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_numerical = 3;  // plus the experiment index

// Runs the experiment, writes report.json and the CSV artifacts into
// output_dir and prints a summary table to out. Returns the exit code.
int run(const RunConfig& config, std::ostream& out);

}  // namespace liouville::cli
