#include "hetnet/glv.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

Eigen::VectorXd GLVSystem::rhs(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = growth + interaction * x;
  return x.cwiseProduct(g);
}

void GLVSystem::check() const {
  const int n = dim();
  if (n < 3) fail(ErrorCode::ConfigError, "GLV systems need dim >= 3");
  if (interaction.rows() != n || interaction.cols() != n)
    fail(ErrorCode::ConfigError, "interaction matrix shape does not match growth vector");
  for (int i = 0; i < n; ++i)
    if (!(interaction(i, i) < 0.0))
      fail(ErrorCode::ConfigError, "interaction diagonal must be strictly negative");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    fail(ErrorCode::ConfigError, "label count does not match dim");
}

namespace {

std::string species_label(const GLVSystem& sys, int k) {
  if (!sys.labels.empty()) return sys.labels[k];
  return "x" + std::to_string(k + 1);
}

}  // namespace

std::vector<AxisEquilibrium> axis_equilibria(const GLVSystem& sys) {
  sys.check();
  const int n = sys.dim();
  std::vector<AxisEquilibrium> out;
  for (int k = 0; k < n; ++k) {
    double xk = sys.growth[k] / (-sys.interaction(k, k));
    if (!(xk > 0.0)) continue;
    AxisEquilibrium eq;
    eq.axis = k;
    eq.label = species_label(sys, k);
    eq.state = Eigen::VectorXd::Zero(n);
    eq.state[k] = xk;
    eq.spectrum = Eigen::VectorXd(n);
    for (int m = 0; m < n; ++m)
      eq.spectrum[m] = m == k ? sys.interaction(k, k) * xk
                              : sys.growth[m] + sys.interaction(m, k) * xk;
    out.push_back(std::move(eq));
  }
  AxisEquilibrium origin;
  origin.axis = -1;
  origin.label = "origin";
  origin.state = Eigen::VectorXd::Zero(n);
  origin.spectrum = sys.growth;
  out.push_back(std::move(origin));
  return out;
}

GLVNetwork network_from_glv(const GLVSystem& sys,
                            const std::vector<ConnectionSpec>& explicit_connections) {
  sys.check();
  auto eqs = axis_equilibria(sys);
  eqs.pop_back();  // drop the origin: only axis saddles carry the network
  if (eqs.empty()) fail(ErrorCode::ConfigError, "no positive axis equilibria");

  struct Node {
    int axis;
    std::string label;
    Eigen::VectorXd state;
    std::vector<double> expanding;   // descending
    std::vector<double> contracting; // ascending magnitudes
    std::vector<int> expanding_axis; // axis per expanding entry
  };
  std::vector<Node> nodes;
  for (const auto& e : eqs) {
    Node nd;
    nd.axis = e.axis;
    nd.label = e.label;
    nd.state = e.state;
    std::vector<std::pair<double, int>> pos;
    std::vector<double> neg;
    for (int m = 0; m < sys.dim(); ++m) {
      double v = e.spectrum[m];
      if (v > 0.0)
        pos.push_back({v, m});
      else
        neg.push_back(-v);
    }
    std::sort(pos.begin(), pos.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::sort(neg.begin(), neg.end());
    for (auto& [v, m] : pos) {
      nd.expanding.push_back(v);
      nd.expanding_axis.push_back(m);
    }
    nd.contracting = std::move(neg);
    nodes.push_back(std::move(nd));
  }

  auto node_of_axis = [&nodes](int axis) -> int {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].axis == axis) return static_cast<int>(i);
    return -1;
  };

  // Candidate connections: direction m expands at xi_k, direction k contracts
  // at xi_m. Ranks follow the descending expanding list.
  std::vector<ConnectionSpec> conns;
  if (!explicit_connections.empty()) {
    conns = explicit_connections;
  } else {
    for (const auto& nd : nodes) {
      int found = 0;
      for (size_t r = 0; r < nd.expanding.size(); ++r) {
        int m = nd.expanding_axis[r];
        int tgt = node_of_axis(m);
        if (tgt < 0) continue;
        double back = sys.growth[nd.axis] +
                      sys.interaction(nd.axis, m) * nodes[tgt].state[m];
        if (back < 0.0) {
          conns.push_back({nd.label, nodes[tgt].label, static_cast<int>(r) + 1});
          ++found;
        }
      }
      if (found == 0)
        fail(ErrorCode::ConfigError,
             "no connection inferable from '" + nd.label +
                 "'; provide an explicit connection list");
    }
  }

  // Walk the strong connections from the first axis saddle to order the
  // principal cycle.
  std::vector<int> order;
  int principal = 0;
  {
    auto strong_target = [&](const std::string& src) -> int {
      for (const auto& c : conns)
        if (c.source == src && c.source_eigen_index == 1) {
          for (size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].label == c.target) return static_cast<int>(i);
        }
      return -1;
    };
    std::vector<bool> seen(nodes.size(), false);
    int cur = 0;
    bool closed = false;
    while (cur >= 0 && !seen[cur]) {
      seen[cur] = true;
      order.push_back(cur);
      int nxt = strong_target(nodes[cur].label);
      if (nxt == 0) {
        closed = true;
        break;
      }
      cur = nxt;
    }
    if (closed) {
      principal = static_cast<int>(order.size());
      for (size_t i = 0; i < nodes.size(); ++i)
        if (!seen[i]) order.push_back(static_cast<int>(i));
    } else {
      order.clear();
      for (size_t i = 0; i < nodes.size(); ++i) order.push_back(static_cast<int>(i));
      principal = static_cast<int>(nodes.size());
    }
  }

  GLVNetwork out;
  for (int idx : order) {
    const Node& nd = nodes[idx];
    EquilibriumSpec eq;
    eq.label = nd.label;
    eq.lambda_expanding = nd.expanding;
    eq.lambda_contracting = nd.contracting;
    out.net.equilibria.push_back(std::move(eq));
    out.node_axis.push_back(nd.axis);
    out.node_state.push_back(nd.state);
  }
  out.net.connections = std::move(conns);
  out.net.principal_length = principal;
  return out;
}

Trajectory integrate(const GLVSystem& sys, const Eigen::VectorXd& x0, double t_max,
                     const IntegrateOptions& opt) {
  sys.check();
  if (x0.size() != sys.dim()) fail(ErrorCode::ConfigError, "initial state dimension mismatch");
  if (!(opt.rel_tol > 1e-14 && opt.rel_tol < 1e-2) || !(opt.abs_tol > 1e-14 && opt.abs_tol < 1e-2))
    fail(ErrorCode::ConfigError, "tolerances must lie in (1e-14, 1e-2)");
  if (!(t_max > 0.0)) fail(ErrorCode::ConfigError, "t_max must be positive");

  Trajectory traj;
  OdeOptions oopt;
  oopt.rel_tol = opt.rel_tol;
  oopt.abs_tol = opt.abs_tol;
  oopt.max_step = opt.max_step;
  oopt.project = [](Eigen::VectorXd& y) {
    for (int i = 0; i < y.size(); ++i)
      if (y[i] < 0.0) y[i] = 0.0;
  };
  oopt.observer = [&](double t, const Eigen::VectorXd& y) {
    if (opt.store) {
      traj.times.push_back(t);
      traj.states.push_back(y);
    }
    return opt.observer ? opt.observer(t, y) : true;
  };

  auto rhs = [&sys](double, const Eigen::VectorXd& y) { return sys.rhs(y); };
  OdeResult res = integrate_ode(rhs, x0, 0.0, t_max, oopt);
  traj.stats = res.stats;
  traj.status = res.status;
  traj.time_reached = res.time_reached;
  if (!opt.store) {
    traj.times = {res.time_reached};
    traj.states = {res.state};
  }
  return traj;
}

ItineraryBuilder::ItineraryBuilder(std::vector<std::string> labels,
                                   std::vector<Eigen::VectorXd> points, double eps)
    : labels_(std::move(labels)), points_(std::move(points)), eps_(eps) {
  if (labels_.size() != points_.size())
    fail(ErrorCode::ConfigError, "itinerary labels/points size mismatch");
  if (!(eps > 0.0)) fail(ErrorCode::ConfigError, "eps must be positive");
  double min_pair = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < points_.size(); ++i)
    for (size_t j = i + 1; j < points_.size(); ++j)
      min_pair = std::min(min_pair, (points_[i] - points_[j]).norm());
  if (points_.size() > 1 && !(eps < 0.5 * min_pair))
    fail(ErrorCode::EpsTooLarge, "eps must stay below half the minimal equilibrium distance");
}

void ItineraryBuilder::feed(double t, const Eigen::VectorXd& x) {
  int now = -1;
  double now_dist = 0.0;
  for (size_t i = 0; i < points_.size(); ++i) {
    double d = (x - points_[i]).norm();
    if (d < eps_) {
      now = static_cast<int>(i);
      now_dist = d;
      break;  // balls are disjoint
    }
  }
  if (!started_) {
    started_ = true;
    if (now >= 0) {
      inside_ = now;
      entry_ = t;
      min_dist_ = now_dist;
    }
    last_t_ = t;
    last_x_ = x;
    return;
  }

  auto crossing = [&](int ball) {
    double d0 = (last_x_ - points_[ball]).norm() - eps_;
    double d1 = (x - points_[ball]).norm() - eps_;
    if (d1 == d0) return t;
    double f = d0 / (d0 - d1);
    f = std::min(1.0, std::max(0.0, f));
    return last_t_ + f * (t - last_t_);
  };

  if (now != inside_) {
    if (inside_ >= 0)
      visits_.push_back({labels_[inside_], entry_, crossing(inside_), min_dist_});
    if (now >= 0) {
      entry_ = crossing(now);
      min_dist_ = now_dist;
    }
    inside_ = now;
  } else if (now >= 0) {
    min_dist_ = std::min(min_dist_, now_dist);
  }
  last_t_ = t;
  last_x_ = x;
}

Itinerary ItineraryBuilder::finish() {
  if (inside_ >= 0) {
    visits_.push_back({labels_[inside_], entry_, last_t_, min_dist_});
    inside_ = -1;
  }
  Itinerary it;
  it.visits = visits_;
  it.eps = eps_;
  return it;
}

Itinerary detect_itinerary(const Trajectory& traj, const std::vector<std::string>& labels,
                           const std::vector<Eigen::VectorXd>& points, double eps) {
  ItineraryBuilder b(labels, points, eps);
  for (size_t i = 0; i < traj.times.size(); ++i) b.feed(traj.times[i], traj.states[i]);
  return b.finish();
}

namespace {

// Tube geometry around one principal connection: the heteroclinic curve lies
// in the invariant coordinate face (src_axis, dst_axis); distance to it splits
// into the in-face polyline distance and the off-face norm.
struct EdgeTube {
  int a_axis, b_axis;                      // face coordinates
  std::vector<Eigen::Vector2d> polyline;   // (x_a, x_b) along the connection

  double dist(const Eigen::VectorXd& x) const {
    double off2 = 0.0;
    for (int m = 0; m < x.size(); ++m)
      if (m != a_axis && m != b_axis) off2 += x[m] * x[m];
    Eigen::Vector2d p(x[a_axis], x[b_axis]);
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < polyline.size(); ++i) {
      Eigen::Vector2d s = polyline[i], e = polyline[i + 1], d = e - s;
      double len2 = d.squaredNorm();
      double f = len2 > 0.0 ? std::min(1.0, std::max(0.0, (p - s).dot(d) / len2)) : 0.0;
      best = std::min(best, (p - (s + f * d)).squaredNorm());
    }
    return std::sqrt(best + off2);
  }
};

EdgeTube trace_connection(const GLVSystem& sys, int a_axis, double a_star, int b_axis,
                          double b_star) {
  // Face-restricted dynamics in coordinates (a, b).
  auto rhs = [&](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd dy(2);
    dy[0] = y[0] * (sys.growth[a_axis] + sys.interaction(a_axis, a_axis) * y[0] +
                    sys.interaction(a_axis, b_axis) * y[1]);
    dy[1] = y[1] * (sys.growth[b_axis] + sys.interaction(b_axis, a_axis) * y[0] +
                    sys.interaction(b_axis, b_axis) * y[1]);
    return dy;
  };
  std::vector<Eigen::Vector2d> raw;
  Eigen::Vector2d target(0.0, b_star);
  OdeOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-12;
  opt.max_step = 0.25;
  opt.observer = [&](double, const Eigen::VectorXd& y) {
    raw.emplace_back(y[0], y[1]);
    return (Eigen::Vector2d(y[0], y[1]) - target).norm() > 1e-4;
  };
  Eigen::VectorXd y0(2);
  y0 << a_star, 1e-7 * std::max(1.0, b_star);
  integrate_ode(rhs, y0, 0.0, 5000.0, opt);
  raw.emplace_back(target);  // close the last gap

  // Arc-length resample to a fixed budget of segments.
  std::vector<double> s(raw.size(), 0.0);
  for (size_t i = 1; i < raw.size(); ++i) s[i] = s[i - 1] + (raw[i] - raw[i - 1]).norm();
  const int kSegments = 256;
  EdgeTube tube;
  tube.a_axis = a_axis;
  tube.b_axis = b_axis;
  tube.polyline.reserve(kSegments + 1);
  double total = s.back();
  size_t j = 0;
  for (int i = 0; i <= kSegments; ++i) {
    double want = total * i / kSegments;
    while (j + 1 < raw.size() && s[j + 1] < want) ++j;
    if (j + 1 >= raw.size()) {
      tube.polyline.push_back(raw.back());
      continue;
    }
    double span = s[j + 1] - s[j];
    double f = span > 0.0 ? (want - s[j]) / span : 0.0;
    tube.polyline.push_back(raw[j] + f * (raw[j + 1] - raw[j]));
  }
  return tube;
}

struct ChannelGeometry {
  std::vector<Eigen::VectorXd> balls;  // principal node states, cycle order
  std::vector<std::string> labels;
  std::vector<EdgeTube> tubes;  // tube i: node i -> node i+1 (closing edge included)

  bool in_V(const Eigen::VectorXd& x, double eps, double delta) const {
    for (const auto& c : balls)
      if ((x - c).norm() < eps) return true;
    for (const auto& t : tubes)
      if (t.dist(x) < delta) return true;
    return false;
  }
};

ChannelGeometry build_geometry(const GLVSystem& sys, const GLVNetwork& gnet) {
  ChannelGeometry geo;
  const int nstar = gnet.net.principal_length;
  if (nstar <= 0) fail(ErrorCode::HypothesisError, "no principal cycle to follow");
  for (int i = 0; i < nstar; ++i) {
    geo.balls.push_back(gnet.node_state[i]);
    geo.labels.push_back(gnet.net.equilibria[i].label);
  }
  for (int i = 0; i < nstar; ++i) {
    int j = (i + 1) % nstar;
    int a = gnet.node_axis[i], b = gnet.node_axis[j];
    geo.tubes.push_back(
        trace_connection(sys, a, gnet.node_state[i][a], b, gnet.node_state[j][b]));
  }
  return geo;
}

SampleOutcome run_sample(const GLVSystem& sys, const ChannelGeometry& geo,
                         const ChannelParams& p, std::uint64_t sample_index) {
  const int n = sys.dim();
  Philox rng(p.seed, sample_index);
  Eigen::VectorXd x0 = geo.balls[0];
  for (int i = 0; i < n; ++i) {
    double lo = p.box.lo[i], hi = p.box.hi[i];
    if (p.box_scale != 1.0) {
      double c = 0.5 * (lo + hi);
      lo = c + p.box_scale * (lo - c);
      hi = c + p.box_scale * (hi - c);
    }
    x0[i] += rng.uniform(lo, hi);
  }

  const int nstar = static_cast<int>(geo.balls.size());
  // A sample follows the channel when an increasing time selection hits the
  // balls in cycle order (greedy first-hit) while the whole path stays in V.
  int progress = 0;  // balls hit in order so far; circuit done at nstar + 1
  bool left = false;

  IntegrateOptions iopt;
  iopt.rel_tol = p.rel_tol;
  iopt.abs_tol = p.abs_tol;
  iopt.max_step = p.max_step;
  iopt.store = false;
  iopt.observer = [&](double, const Eigen::VectorXd& y) {
    if ((y - geo.balls[progress % nstar]).norm() < p.eps) ++progress;
    if (progress >= nstar + 1) return false;  // circuit complete
    if (!geo.in_V(y, p.eps, p.delta)) {
      left = true;
      return false;
    }
    return true;
  };

  Trajectory traj = integrate(sys, x0, p.t_max, iopt);
  if (traj.status == OdeStatus::StepUnderflow) return SampleOutcome::Aborted;
  if (progress >= nstar + 1) return SampleOutcome::Followed;
  if (left) return SampleOutcome::LeftChannel;
  return SampleOutcome::Timeout;
}

}  // namespace

ChannelReport channel_experiment(const GLVSystem& sys, const GLVNetwork& gnet,
                                 const ChannelParams& params) {
  sys.check();
  if (params.box.lo.size() != sys.dim() || params.box.hi.size() != sys.dim())
    fail(ErrorCode::ConfigError, "sampling box dimensions do not match the system");
  if (!(params.eps > 0.0) || !(params.delta > 0.0))
    fail(ErrorCode::ConfigError, "eps and delta must be positive");
  if (params.n_samples <= 0) fail(ErrorCode::ConfigError, "n_samples must be positive");

  ChannelReport rep;
  rep.validation = validate_hypotheses(gnet.net);
  rep.eps = params.eps;
  rep.delta = params.delta;
  rep.t_max = params.t_max;
  rep.seed = params.seed;
  rep.n_initial = params.n_samples;

  ChannelGeometry geo = build_geometry(sys, gnet);
  rep.sequence = geo.labels;

  rep.outcomes.assign(params.n_samples, 0);
  const int workers = std::max(1, params.workers);
  auto work = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i)
      rep.outcomes[i] =
          static_cast<std::uint8_t>(run_sample(sys, geo, params, static_cast<std::uint64_t>(i)));
  };
  if (workers == 1) {
    work(0, params.n_samples);
  } else {
    std::vector<std::thread> pool;
    int chunk = (params.n_samples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int lo = w * chunk, hi = std::min(params.n_samples, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  for (auto o : rep.outcomes) {
    switch (static_cast<SampleOutcome>(o)) {
      case SampleOutcome::Followed: ++rep.n_following; break;
      case SampleOutcome::LeftChannel: ++rep.n_left; break;
      case SampleOutcome::Timeout: ++rep.n_timeout; break;
      case SampleOutcome::Aborted: ++rep.n_aborted; break;
    }
  }
  rep.fraction = static_cast<double>(rep.n_following) / rep.n_initial;
  return rep;
}

std::vector<PerturbationReport> perturb_and_redetect(const GLVSystem& sys, double magnitude,
                                                     int n_perturbations,
                                                     const ChannelParams& params) {
  sys.check();
  if (magnitude < 0.0) fail(ErrorCode::ConfigError, "magnitude must be nonnegative");
  if (n_perturbations < 0) fail(ErrorCode::ConfigError, "n_perturbations must be nonnegative");

  std::vector<PerturbationReport> out;
  const std::uint64_t pseed = split_seed(params.seed, 0x70);
  for (int k = 0; k <= n_perturbations; ++k) {
    GLVSystem pert = sys;
    if (k > 0) {
      Philox rng(pseed, static_cast<std::uint64_t>(k));
      for (int i = 0; i < sys.dim(); ++i)
        for (int j = 0; j < sys.dim(); ++j)
          pert.interaction(i, j) += magnitude * rng.uniform(-1.0, 1.0);
      for (int i = 0; i < sys.dim(); ++i)
        pert.growth[i] += magnitude * rng.uniform(-1.0, 1.0);
    }
    PerturbationReport rep;
    rep.index = k;
    rep.magnitude = k == 0 ? 0.0 : magnitude;
    try {
      GLVNetwork gnet = network_from_glv(pert);
      rep.channel = channel_experiment(pert, gnet, params);
      rep.revalidated = rep.channel.validation.passed;
    } catch (const Error& e) {
      rep.revalidated = false;
      rep.channel.validation.passed = false;
      rep.channel.validation.violations.push_back({"H1", e.what()});
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace hetnet
