#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetnet/measure.hpp"

namespace hetnet {

enum class Command {
  Validate,
  Flight,
  Transit,
  Wedge,
  Measure,
  Scaling,
  Omega,
  GlvSim,
  Channel,
  Perturb,
  Verdict
};

const char* command_name(Command c);

// Resolved invocation of one subcommand. Unset numeric overrides stay NaN /
// -1; the command then falls back to the config file or the documented
// default. Output paths are optional; the human-readable summary always goes
// to stdout.
struct RunConfig {
  Command command = Command::Validate;
  std::string input;                // network or GLV config path
  std::vector<std::string> inputs;  // verdict: artifact paths
  std::string out_json;             // artifact path
  std::string out_csv;              // CSV path

  std::string node;  // node label selector (measure/scaling/omega)
  std::vector<double> lambdas, x, y, x0;
  std::vector<double> deltas;

  double eps = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double t_max = std::numeric_limits<double>::quiet_NaN();
  double norm = std::numeric_limits<double>::quiet_NaN();       // omega start |x|
  double box_scale = std::numeric_limits<double>::quiet_NaN();  // channel box rescale
  double magnitude = 1e-3;                                      // perturb
  double threshold = 0.9;  // channel fraction regarded as evidence

  long long n = -1;  // sample count override
  int loops = 8;     // omega circuits
  int count = 10;    // perturbations
  int workers = 1;

  std::uint64_t seed = 0;
  bool has_seed = false;
};

// Executes the command, writes requested artifacts, prints a summary to
// stdout. Returns the process exit code: 0 success, 1 hypothesis failure,
// 2 numerical abort, 3 config/usage errors. Exceptions never escape.
int run(const RunConfig& cfg);

// Envelope shared by every JSON artifact. `config` is the resolved parameter
// block (worker counts and output paths excluded, so reruns with different
// parallelism or destinations stay byte-identical).
struct Artifact {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::string config_hash;
  std::string network_fingerprint;
  std::vector<CheckResult> checks;
  nlohmann::json results;
};

nlohmann::json artifact_to_json(const Artifact& a);
Artifact artifact_from_json(const nlohmann::json& j);

// Merges artifact documents into one summary with a stability_verdict over
// all embedded checks. Throws UsageError on an empty list and ConfigError
// when the artifacts carry different network fingerprints.
nlohmann::json report_bundle(const std::vector<nlohmann::json>& artifacts);

}  // namespace hetnet
