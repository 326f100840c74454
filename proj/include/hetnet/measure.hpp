#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hetnet/local_maps.hpp"
#include "hetnet/network.hpp"

namespace hetnet {

// Monte Carlo estimate of the relative measure of the wedge complement
// inside E(delta). analytic_bound is eps^(-2 alpha) delta^(alpha - 1) as a
// plain power law; bound_corrected carries the unit-ball volume factor
// (2^u / V_u) eps^(-alpha) delta^(alpha - 1), which is usually tighter.
// Both are NaN when u = 1 (the complement is empty and ratio is exactly 0).
struct MeasureEstimate {
  std::string node;
  double eps = 0.0;
  double delta = 0.0;
  double ratio = 0.0;
  double half_width = 0.0;  // 95% Wald interval with continuity correction
  long long n_samples = 0;
  long long hits = 0;  // complement hits
  std::uint64_t seed = 0;
  double analytic_bound = std::numeric_limits<double>::quiet_NaN();
  double bound_corrected = std::numeric_limits<double>::quiet_NaN();
  bool wide_ci = false;  // half_width > ratio/2, or fewer than 100 hits
  std::string note;
};

// Samples x uniformly in the expanding-coordinate ball of radius delta and
// counts points whose exit direction misses the eps-wedge. Sample i draws
// from the counter stream (seed, i), so the result is independent of the
// worker partition. Only eq.lambda_expanding is consulted.
// Throws ConfigError for eps outside (0,1) or nonpositive n, OutsideChart
// for delta >= 1.
MeasureEstimate estimate_wedge_complement_ratio(const EquilibriumSpec& eq, double eps,
                                                double delta, long long n_samples,
                                                std::uint64_t seed, int workers = 1);

struct ScalingStudy {
  std::string node;
  double eps = 0.0;
  std::vector<MeasureEstimate> cells;
  // Least-squares slope of ln(ratio) against ln(delta) over cells with a
  // usable confidence interval; NaN when fewer than two cells qualify.
  double slope = std::numeric_limits<double>::quiet_NaN();
  double expected_slope = std::numeric_limits<double>::quiet_NaN();  // alpha - 1
  int used_cells = 0;
  bool vacuous = false;  // u = 1: every ratio is exactly 0
  std::string note;
};

// One estimate per delta (cell i uses seed split_seed(seed, i)); deltas must
// be strictly decreasing with at least 4 values inside (0,1).
ScalingStudy delta_scaling_study(const EquilibriumSpec& eq, double eps,
                                 const std::vector<double>& deltas, long long n_samples,
                                 std::uint64_t seed, int workers = 1);

enum class OrbitStatus { Completed, Escaped, AlreadyConverged };

// Iterates of the full return map from a start point on the first principal
// in-section. Entry k of each list describes the k-th iterate (entry 0 is the
// start). defect_exponent_single/composed record, per leg, the two published
// wedge-decay exponents 2 rho_i (1 - beta_i) and rho_i; the orbit data lets
// callers test either reading.
struct OmegaOrbit {
  std::vector<InSectionPoint> points;
  std::vector<double> x_norms;
  std::vector<double> wedge_defects;
  std::vector<double> dist_to_y_plus;  // min distance of y to y_plus/y_minus at node 1
  OrbitStatus status = OrbitStatus::Completed;
  int escape_loop = -1;  // loop index that left the chart, when Escaped
  double rho_loop = 0.0;
  double zeta_loop = 0.0;
  std::vector<double> defect_exponent_single;
  std::vector<double> defect_exponent_composed;
  std::string note;
};

// Runs n_loops circuits, or stops early when the orbit collapses onto the
// connection (x underflows to 0) or escapes the chart (recorded, not thrown).
// A start with x = 0 is reported as AlreadyConverged.
OmegaOrbit iterate_return_map(const SectionMaps& maps, const InSectionPoint& start,
                              int n_loops);

struct LemmaRanges {
  int u_min = 2;
  int u_max = 4;
  double lambda_min = 0.2;
  double lambda_max = 5.0;
  double xnorm_min = 1e-4;
  double xnorm_max = 0.99;
};

struct LemmaCheckReport {
  long long n_samples = 0;
  long long checked = 0;
  long long skipped_axis = 0;  // x1 = 0 draws: bracket still checked, 4.2/4.3 skipped
  long long violations_bracket = 0;
  long long violations_defect_bound = 0;   // defect < |x1|^(-2 beta) sum_{j>=2} x_j^2
  long long violations_cone_bound = 0;     // defect < k^(-beta) ||x||^(2-2 beta)
  long long violations_exit_bound = 0;     // exp(T) <= |x1|^(-1/lambda1)
  bool passed = false;
  std::vector<std::string> witnesses;  // first few failing samples
};

// Randomized verification of the flight-time bracket, the two wedge-defect
// bounds, and the exit-time bound. Every 10th draw is adversarial
// (|x1| = 0.999 ||x||); every 100th puts x1 = 0 exactly. Draw i uses the
// counter stream (seed, i).
LemmaCheckReport check_lemma_inequalities(long long n_samples, std::uint64_t seed,
                                          const LemmaRanges& ranges = {});

enum class CheckStatus { Pass, Fail, Warn, Missing };

struct CheckResult {
  std::string kind;  // hypotheses | measure | contraction | channel | ...
  std::string name;
  CheckStatus status = CheckStatus::Missing;
  std::string detail;
};

enum class Verdict { PredominantlyStableEvidence, Inconclusive, Counterevidence };

struct StabilityVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<CheckResult> supporting;
  std::string rationale;
};

const char* check_status_name(CheckStatus s);
const char* verdict_name(Verdict v);

// Deterministic aggregation: any Fail -> Counterevidence; otherwise any Warn,
// Missing, or absent required kind (hypotheses, measure, contraction,
// channel) -> Inconclusive; otherwise PredominantlyStableEvidence. The
// rationale names the checks behind the verdict. Evidence only, not proof.
StabilityVerdict stability_verdict(const std::vector<CheckResult>& checks);

}  // namespace hetnet
