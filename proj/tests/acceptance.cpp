// Acceptance gate. Each criterion prints one [PASS]/[FAIL] line with the
// measured margins; the process exits 0 only when every criterion passes.
// Tolerances and sample counts are pinned here, not configurable.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hetnet/glv.hpp"
#include "hetnet/json_io.hpp"
#include "hetnet/local_maps.hpp"
#include "hetnet/measure.hpp"
#include "hetnet/network.hpp"
#include "hetnet/rng.hpp"
#include "oracles.hpp"

using namespace hetnet;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kCli = HETNET_CLI_PATH;
const std::string kConfigDir = HETNET_CONFIG_DIR;

int g_failed = 0;

void report(int idx, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run_quiet(const std::string& cmd) {
  int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

// The three sweep nodes: expanding (alpha, 1) so alpha is the rate ratio.
EquilibriumSpec sweep_node(double alpha) {
  if (alpha == 1.5) return {"q15", {1.5, 1.0}, {2.05, 3.1}};
  if (alpha == 2.0) return {"q2", {2.0, 1.0}, {3.3, 4.7}};
  return {"q3", {3.0, 1.0}, {3.45, 5.2}};
}

void criterion1_lemma_sweep() {
  auto t0 = Clock::now();
  LemmaCheckReport rep = check_lemma_inequalities(100000, 7);
  double dt = seconds_since(t0);
  long long violations = rep.violations_bracket + rep.violations_defect_bound +
                         rep.violations_cone_bound + rep.violations_exit_bound;
  bool ok = rep.passed && violations == 0 && rep.n_samples == 100000 && dt < 10.0;
  report(1, ok, "randomized inequality sweep",
         fmt("%lld draws, %lld violations, %.1fs < 10s", rep.n_samples, violations, dt));
}

void criterion2_flight_oracle() {
  double worst_t = 0.0, worst_unit = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Philox rng(2202, static_cast<std::uint64_t>(i));
    double l2 = rng.uniform(0.25, 2.5);
    std::vector<double> rates = {2.0 * l2, l2};
    double r = std::exp(rng.uniform(std::log(1e-3), std::log(0.95)));
    Eigen::VectorXd x = rng.gaussian_vector(2);
    if (x.norm() < 1e-12) x << 1.0, 0.0;
    x *= r / x.norm();
    double t = time_of_flight(x, rates);
    double t_ref = oracle::quad_flight_T(x[0], x[1], l2);
    worst_t = std::max(worst_t, std::abs(t - t_ref));
    Eigen::VectorXd tv = tau(x, rates);
    worst_unit = std::max(worst_unit, std::abs(tv.norm() - 1.0));
  }
  bool ok = worst_t <= 1e-9 && worst_unit <= 1e-10;
  report(2, ok, "flight time vs closed form",
         fmt("1000 cases, max |T err| = %.2e <= 1e-9, max |tau norm - 1| = %.2e <= 1e-10",
             worst_t, worst_unit));
}

void criterion3_measure_bound() {
  auto t0 = Clock::now();
  const double alphas[] = {1.5, 2.0, 3.0};
  const double epss[] = {0.3, 0.5};
  const double deltas[] = {0.02, 0.01, 0.005};
  const long long n = 1000000;
  bool ok = true;
  double worst_gap = 0.0;  // |MC - quadrature| in half-widths
  double worst_bound_slack = -1e300;  // ratio - (bound + 3 hw), negative is good
  int cell = 0;
  for (double alpha : alphas)
    for (double eps : epss)
      for (double delta : deltas) {
        MeasureEstimate m = estimate_wedge_complement_ratio(
            sweep_node(alpha), eps, delta, n, split_seed(33, cell), 1);
        double q = oracle::complement_ratio_quadrature(alpha, eps, delta);
        worst_bound_slack =
            std::max(worst_bound_slack, m.ratio - (m.analytic_bound + 3.0 * m.half_width));
        worst_gap = std::max(worst_gap, std::abs(m.ratio - q) / m.half_width);
        if (m.ratio > m.analytic_bound + 3.0 * m.half_width) ok = false;
        if (std::abs(m.ratio - q) > 3.0 * m.half_width) ok = false;
        ++cell;
      }
  double dt = seconds_since(t0);
  if (dt >= 300.0) ok = false;
  report(3, ok, "complement measure within analytic bound",
         fmt("18 cells x 1e6, worst bound slack %.2e, worst |MC-quadrature| %.2f hw <= 3, "
             "%.0fs < 300s",
             worst_bound_slack, worst_gap, dt));
}

void criterion4_scaling_slope() {
  ScalingStudy st =
      delta_scaling_study(sweep_node(2.0), 0.3, {0.02, 0.01, 0.005, 0.0025}, 1000000, 11, 1);
  bool ok = !std::isnan(st.slope) && st.slope >= 0.7 && st.used_cells == 4;
  report(4, ok, "measure scaling slope in delta",
         fmt("alpha=2 ladder, slope %.4f >= 0.7 over %d cells", st.slope, st.used_cells));
}

void criterion5_return_map_contraction() {
  // Scalar two-node loop: the iterates follow the loop exponent exactly.
  NetworkSpec scalar_net =
      network_from_json(load_json_file(kConfigDir + "/two_node_scalar.json"));
  SectionMaps scalar_maps(scalar_net);
  InSectionPoint start;
  start.node = scalar_maps.sequence().front();
  start.x = Eigen::VectorXd::Constant(1, 0.1);
  start.y = Eigen::VectorXd::Constant(1, 1.0);
  OmegaOrbit scalar_orbit = iterate_return_map(scalar_maps, start, 4);
  double worst_rel = 1e300;
  bool scalar_ok = scalar_orbit.status == OrbitStatus::Completed &&
                   scalar_orbit.x_norms.size() == 5;
  if (scalar_ok) {
    worst_rel = 0.0;
    for (int k = 0; k <= 4; ++k) {
      double expected = std::pow(0.1, std::pow(2.25, k));
      worst_rel = std::max(worst_rel,
                           std::abs(scalar_orbit.x_norms[k] - expected) / expected);
    }
    scalar_ok = worst_rel <= 1e-9;
  }

  // Four-node system with one two-direction node: per-loop norm bound.
  GLVSystem sys = glv_from_json(load_json_file(kConfigDir + "/four_species.json"));
  GLVNetwork gnet = network_from_glv(sys);
  SectionMaps maps(gnet.net);
  std::string node0 = maps.sequence().front();
  const EquilibriumSpec& eq = gnet.net.at(node0);
  bool planar_ok = eq.u() == 2;
  int checked_loops = 0;
  double worst_margin = 0.0;  // max over loops of norm/(bound) - 1
  for (int i = 0; i < 1000 && planar_ok; ++i) {
    Philox rng(55, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x;
    int tries = 0;
    do {
      double r = std::exp(rng.uniform(std::log(3e-3), std::log(3e-2)));
      x = rng.gaussian_vector(2);
      if (x.norm() < 1e-12) x << 1.0, 0.0;
      x *= r / x.norm();
      if (++tries > 10000) {
        planar_ok = false;
        break;
      }
    } while (!wedge_membership(x, eq.lambda_expanding, 0.3));
    Eigen::VectorXd y = rng.gaussian_vector(eq.s());
    if (y.norm() < 1e-12) y.setZero(), y[0] = 1.0;
    y.normalize();
    OmegaOrbit orb = iterate_return_map(maps, {node0, x, y}, 3);
    if (orb.status != OrbitStatus::Completed || orb.x_norms.size() < 2) {
      planar_ok = false;
      break;
    }
    for (size_t k = 0; k + 1 < orb.x_norms.size(); ++k) {
      double bound = orb.zeta_loop * std::pow(orb.x_norms[k], orb.rho_loop);
      if (orb.x_norms[k + 1] > bound * (1.0 + 1e-12)) planar_ok = false;
      if (bound > 0.0)
        worst_margin = std::max(worst_margin, orb.x_norms[k + 1] / bound - 1.0);
      ++checked_loops;
    }
  }
  bool ok = scalar_ok && planar_ok;
  report(5, ok, "return map contracts at the loop exponent",
         fmt("scalar iterates rel err %.1e <= 1e-9; 1000 wedge starts, %d loops within "
             "zeta*norm^rho (worst margin %.1e)",
             worst_rel, checked_loops, worst_margin));
}

void criterion6_channel_fraction() {
  auto t0 = Clock::now();
  nlohmann::json doc = load_json_file(kConfigDir + "/may_leonard.json");
  GLVSystem sys = glv_from_json(doc);
  GLVNetwork gnet = network_from_glv(sys);
  ChannelParams params = channel_params_from_json(doc.at("experiment"), sys.dim());
  params.n_samples = 500;
  ChannelReport rep = channel_experiment(sys, gnet, params);

  nlohmann::json doc_u = load_json_file(kConfigDir + "/may_leonard_unstable.json");
  GLVSystem sys_u = glv_from_json(doc_u);
  GLVNetwork gnet_u = network_from_glv(sys_u);
  ChannelParams params_u = channel_params_from_json(doc_u.at("experiment"), sys_u.dim());
  params_u.n_samples = 500;
  ChannelReport rep_u = channel_experiment(sys_u, gnet_u, params_u);
  bool h4_flag = false;
  for (const auto& v : rep_u.validation.violations)
    if (v.hypothesis == "H4") h4_flag = true;

  double dt = seconds_since(t0);
  bool ok = rep.n_initial == 500 && rep.fraction >= 0.95 && rep.validation.passed &&
            rep_u.fraction <= 0.5 && !rep_u.validation.passed && h4_flag && dt < 120.0;
  report(6, ok, "channel following fraction",
         fmt("net contracting: %.3f >= 0.95 (500 samples); net expanding variant: %.3f <= 0.5 "
             "with H4 flagged; %.1fs < 120s",
             rep.fraction, rep_u.fraction, dt));
}

void criterion7_perturbation_robustness() {
  nlohmann::json doc = load_json_file(kConfigDir + "/may_leonard.json");
  GLVSystem sys = glv_from_json(doc);
  ChannelParams params = channel_params_from_json(doc.at("experiment"), sys.dim());
  params.n_samples = 500;
  std::vector<PerturbationReport> reports = perturb_and_redetect(sys, 1e-3, 10, params);
  bool ok = reports.size() == 11;
  double min_fraction = 1.0;
  int revalidated = 0;
  for (size_t k = 1; k < reports.size(); ++k) {
    if (reports[k].revalidated) ++revalidated;
    min_fraction = std::min(min_fraction, reports[k].channel.fraction);
    if (!reports[k].revalidated || reports[k].channel.fraction < 0.9) ok = false;
  }
  report(7, ok, "robustness under coefficient perturbations",
         fmt("10 perturbations at 1e-3: %d/10 revalidated, min fraction %.3f >= 0.9",
             revalidated, min_fraction));
}

void criterion8_worker_determinism() {
  char tpl[] = "/tmp/hetnet_accept_XXXXXX";
  char* dir_c = mkdtemp(tpl);
  if (dir_c == nullptr) {
    report(8, false, "deterministic parallel reports", "mkdtemp failed");
    return;
  }
  std::string dir = dir_c;
  const double epss[] = {0.3, 0.5};
  const double deltas[] = {0.02, 0.01, 0.005};
  const int workers[] = {1, 4, 8};
  bool ok = true;
  int files = 0;
  for (int w : workers) {
    int grid = 0;
    for (double eps : epss)
      for (double delta : deltas) {
        std::string stem = dir + "/m_" + std::to_string(w) + "_" + std::to_string(grid++);
        ok = ok && run_quiet(kCli + " measure " + kConfigDir +
                             "/measure_sweep.json --eps " + std::to_string(eps) + " --delta " +
                             std::to_string(delta) + " --n 1000000 --seed 7 --workers " +
                             std::to_string(w) + " --out-json " + stem + ".json --out-csv " +
                             stem + ".csv");
      }
    ok = ok && run_quiet(kCli + " channel " + kConfigDir +
                         "/may_leonard.json --n 500 --seed 42 --workers " + std::to_string(w) +
                         " --out-json " + dir + "/ch_" + std::to_string(w) + ".json");
  }
  if (ok) {
    for (int grid = 0; grid < 6; ++grid) {
      std::string base_json = slurp(dir + "/m_1_" + std::to_string(grid) + ".json");
      std::string base_csv = slurp(dir + "/m_1_" + std::to_string(grid) + ".csv");
      if (base_json.empty() || base_csv.empty()) ok = false;
      for (int w : {4, 8}) {
        std::string stem = dir + "/m_" + std::to_string(w) + "_" + std::to_string(grid);
        if (slurp(stem + ".json") != base_json || slurp(stem + ".csv") != base_csv) ok = false;
        files += 2;
      }
    }
    std::string base_ch = slurp(dir + "/ch_1.json");
    if (base_ch.empty()) ok = false;
    for (int w : {4, 8}) {
      if (slurp(dir + "/ch_" + std::to_string(w) + ".json") != base_ch) ok = false;
      ++files;
    }
  }
  report(8, ok, "deterministic parallel reports",
         fmt("measure grid + channel, workers {1,4,8}: %d files byte-identical", files));
}

}  // namespace

int main() {
  auto t0 = Clock::now();
  criterion1_lemma_sweep();
  criterion2_flight_oracle();
  criterion3_measure_bound();
  criterion4_scaling_slope();
  criterion5_return_map_contraction();
  criterion6_channel_fraction();
  criterion7_perturbation_robustness();
  criterion8_worker_determinism();
  std::printf("%s: %d/8 criteria passed in %.0fs\n", g_failed == 0 ? "ACCEPTED" : "REJECTED",
              8 - g_failed, seconds_since(t0));
  return g_failed == 0 ? 0 : 1;
}
