#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetnet/network.hpp"
#include "hetnet/ode.hpp"

namespace hetnet {

// dx_k/dt = x_k (r_k + sum_j A_kj x_j) on the nonnegative orthant.
struct GLVSystem {
  Eigen::VectorXd growth;       // r
  Eigen::MatrixXd interaction;  // A, strictly negative diagonal
  std::vector<std::string> labels;  // one per species/axis

  int dim() const { return static_cast<int>(growth.size()); }
  Eigen::VectorXd rhs(const Eigen::VectorXd& x) const;
  void check() const;  // throws ConfigError on shape/diagonal violations
};

// Axis equilibrium x_k = r_k / (-A_kk) (listed only when positive), plus the
// origin (axis = -1). The spectrum is analytic: radial value A_kk x_k = -r_k
// and transverse values r_m + A_mk x_k; at the origin it is r itself.
struct AxisEquilibrium {
  int axis = -1;  // -1: origin
  std::string label;
  Eigen::VectorXd state;
  Eigen::VectorXd spectrum;
};

std::vector<AxisEquilibrium> axis_equilibria(const GLVSystem& sys);

// Abstract network induced by the axis saddles: expanding = positive
// transverse values (descending), contracting = magnitudes of the negatives
// (ascending). A connection k -> j is inferred when direction j expands at
// xi_k and direction k contracts at xi_j; its index is the rank of the
// expanding value. Equilibria are reordered so the strong-connection cycle
// from the first axis forms the principal sequence.
// Throws ConfigError when some axis saddle admits no inferable connection
// (an explicit connection list is then required via `explicit_connections`).
struct GLVNetwork {
  NetworkSpec net;
  std::vector<int> node_axis;  // principal node i lives on this axis
  std::vector<Eigen::VectorXd> node_state;
};

GLVNetwork network_from_glv(
    const GLVSystem& sys,
    const std::vector<ConnectionSpec>& explicit_connections = {});

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  OdeStats stats;
  OdeStatus status = OdeStatus::Completed;
  double time_reached = 0.0;
};

struct IntegrateOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.5;
  bool store = true;  // record accepted steps
  std::function<bool(double, const Eigen::VectorXd&)> observer;
};

// Adaptive integration with positive-orthant projection: coordinates that
// start at exactly 0 stay exactly 0; accepted-step dips below 0 (bounded by
// the error control, so of order abs_tol) are clamped to 0. Status
// StepUnderflow marks a stiffness abort with the largest completed time kept
// in the trajectory.
Trajectory integrate(const GLVSystem& sys, const Eigen::VectorXd& x0, double t_max,
                     const IntegrateOptions& opt = {});

struct Visit {
  std::string label;
  double entry = 0.0;
  double exit = 0.0;
  double min_dist = 0.0;
};

struct Itinerary {
  std::vector<Visit> visits;
  double eps = 0.0;
};

// Incremental visit detector over (t, state) samples; entries/exits are
// located by linear interpolation of (distance - eps) between samples.
class ItineraryBuilder {
 public:
  ItineraryBuilder(std::vector<std::string> labels, std::vector<Eigen::VectorXd> points,
                   double eps);
  void feed(double t, const Eigen::VectorXd& x);
  Itinerary finish();  // closes a dangling visit at the last fed time
  const std::vector<Visit>& visits() const { return visits_; }

 private:
  std::vector<std::string> labels_;
  std::vector<Eigen::VectorXd> points_;
  double eps_;
  int inside_ = -1;
  double entry_ = 0.0, min_dist_ = 0.0;
  double last_t_ = 0.0;
  Eigen::VectorXd last_x_;
  bool started_ = false;
  std::vector<Visit> visits_;
};

// Visits of eps-balls around the given equilibria; throws EpsTooLarge unless
// eps < half the minimal pairwise distance (balls must be disjoint).
Itinerary detect_itinerary(const Trajectory& traj, const std::vector<std::string>& labels,
                           const std::vector<Eigen::VectorXd>& points, double eps);

// Sampling box relative to the first principal node, per-coordinate offsets.
struct SampleBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct ChannelParams {
  double eps = 0.2;
  double delta = 0.1;
  int n_samples = 500;
  double t_max = 250.0;
  std::uint64_t seed = 1;
  SampleBox box;
  int workers = 1;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.5;
  double box_scale = 1.0;  // sensitivity reruns scale the box about its center
};

enum class SampleOutcome : std::uint8_t { Followed = 0, LeftChannel = 1, Timeout = 2, Aborted = 3 };

struct ChannelReport {
  int n_initial = 0;
  int n_following = 0;
  int n_left = 0;
  int n_timeout = 0;
  int n_aborted = 0;
  double fraction = 0.0;
  double eps = 0.0, delta = 0.0, t_max = 0.0;
  std::uint64_t seed = 0;
  ValidationReport validation;       // hypothesis flags for the sampled system
  std::vector<std::string> sequence;  // principal labels, cycle order
  std::vector<std::uint8_t> outcomes; // per-sample, index order
};

// Fraction of initial conditions in the box that complete one circuit of the
// principal cycle while staying inside the eps-balls/delta-tubes neighborhood
// of the cycle. Trajectories halt as soon as the outcome is decided.
ChannelReport channel_experiment(const GLVSystem& sys, const GLVNetwork& gnet,
                                 const ChannelParams& params);

struct PerturbationReport {
  int index = 0;            // 0 = baseline
  double magnitude = 0.0;
  ChannelReport channel;
  bool revalidated = false;  // hypotheses still pass after the perturbation
};

// Re-derives the network and re-runs the channel experiment under uniform
// entrywise perturbations of (A, r) of the given magnitude. Perturbation k
// draws from the stream (seed, k); magnitude 0 reproduces the baseline.
// Validation failures are reported (flagged), never thrown.
std::vector<PerturbationReport> perturb_and_redetect(const GLVSystem& sys, double magnitude,
                                                     int n_perturbations,
                                                     const ChannelParams& params);

}  // namespace hetnet
