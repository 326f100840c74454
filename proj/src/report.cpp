#include "hetnet/report.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "hetnet/errors.hpp"
#include "hetnet/glv.hpp"
#include "hetnet/json_io.hpp"
#include "hetnet/local_maps.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

using nlohmann::json;

const char* command_name(Command c) {
  switch (c) {
    case Command::Validate: return "validate";
    case Command::Flight: return "flight";
    case Command::Transit: return "transit";
    case Command::Wedge: return "wedge";
    case Command::Measure: return "measure";
    case Command::Scaling: return "scaling";
    case Command::Omega: return "omega";
    case Command::GlvSim: return "glv-sim";
    case Command::Channel: return "channel";
    case Command::Perturb: return "perturb";
    case Command::Verdict: return "verdict";
  }
  return "?";
}

namespace {

double pick(double override_v, double fallback) {
  return std::isnan(override_v) ? fallback : override_v;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int c = 0; c < m.cols(); ++c) r.push_back(m(i, c));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::ConfigError, "cannot write file: " + path);
  out << content;
  if (!out) fail(ErrorCode::ConfigError, "write failed: " + path);
}

void emit_artifact(const RunConfig& cfg, Artifact a) {
  if (cfg.out_json.empty()) return;
  a.config_hash = config_hash(a.config);
  write_text(cfg.out_json, artifact_to_json(a).dump(2) + "\n");
}

struct LoadedInput {
  json doc;
  bool is_glv = false;
  GLVSystem sys;
  GLVNetwork gnet;
  NetworkSpec net;
  std::vector<std::optional<TransitionMap>> edge_maps;
};

LoadedInput load_input(const std::string& path) {
  if (path.empty()) fail(ErrorCode::UsageError, "an input config path is required");
  LoadedInput in;
  in.doc = load_json_file(path);
  if (in.doc.is_object() && in.doc.contains("interaction")) {
    in.is_glv = true;
    in.sys = glv_from_json(in.doc);
    in.gnet = network_from_glv(in.sys, connections_from_json(in.doc));
    in.net = in.gnet.net;
  } else {
    in.net = network_from_json(in.doc);
    in.edge_maps = transition_maps_from_json(in.doc, in.net);
  }
  return in;
}

std::string join_violations(const ValidationReport& rep) {
  std::string s;
  for (const auto& v : rep.violations) s += (s.empty() ? "" : "; ") + v.hypothesis + ": " + v.detail;
  return s;
}

CheckResult hypotheses_check(const ValidationReport& rep, const std::string& name) {
  CheckResult c;
  c.kind = "hypotheses";
  c.name = name;
  c.status = rep.passed ? CheckStatus::Pass : CheckStatus::Fail;
  c.detail = rep.passed ? "H1-H4 hold" : join_violations(rep);
  return c;
}

json glv_config_json(const GLVSystem& sys) {
  return {{"dim", sys.dim()},
          {"growth", vec_json(sys.growth)},
          {"interaction", mat_json(sys.interaction)},
          {"labels", sys.labels}};
}

json channel_config_json(const GLVSystem& sys, const ChannelParams& p) {
  // workers deliberately absent: parallelism must not show in hashed config
  return {{"glv", glv_config_json(sys)},
          {"eps", p.eps},
          {"delta", p.delta},
          {"n", p.n_samples},
          {"t_max", p.t_max},
          {"seed", p.seed},
          {"box", {{"lo", vec_json(p.box.lo)}, {"hi", vec_json(p.box.hi)}}},
          {"box_scale", p.box_scale},
          {"rel_tol", p.rel_tol},
          {"abs_tol", p.abs_tol},
          {"max_step", p.max_step}};
}

ChannelParams resolve_channel_params(const RunConfig& cfg, const LoadedInput& in) {
  if (!in.is_glv) fail(ErrorCode::ConfigError, "this command needs a GLV config");
  if (!in.doc.contains("experiment"))
    fail(ErrorCode::ConfigError, "GLV config lacks an 'experiment' block (sampling box)");
  ChannelParams p = channel_params_from_json(in.doc.at("experiment"), in.sys.dim());
  p.eps = pick(cfg.eps, p.eps);
  p.delta = pick(cfg.delta, p.delta);
  if (cfg.n > 0) p.n_samples = static_cast<int>(cfg.n);
  p.t_max = pick(cfg.t_max, p.t_max);
  if (cfg.has_seed) p.seed = cfg.seed;
  p.box_scale = pick(cfg.box_scale, p.box_scale);
  p.workers = cfg.workers;
  return p;
}

void print_channel(const ChannelReport& rep) {
  std::cout << "sequence:";
  for (const auto& s : rep.sequence) std::cout << " " << s;
  std::cout << "\nfraction = " << fmt_double(rep.fraction) << " (" << rep.n_following << "/"
            << rep.n_initial << "), left=" << rep.n_left << " timeout=" << rep.n_timeout
            << " aborted=" << rep.n_aborted << "\n";
  if (!rep.validation.passed)
    std::cout << "hypothesis flags: " << join_violations(rep.validation) << "\n";
  for (const auto& n : rep.validation.notes) std::cout << "note: " << n << "\n";
}

CheckResult channel_check(const ChannelReport& rep, double threshold, const std::string& name) {
  CheckResult c;
  c.kind = "channel";
  c.name = name;
  c.status = rep.fraction >= threshold ? CheckStatus::Pass : CheckStatus::Fail;
  c.detail = "fraction " + fmt_double(rep.fraction) + " vs threshold " + fmt_double(threshold);
  return c;
}

// ---- command handlers ----

int cmd_validate(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  ValidationReport rep = validate_hypotheses(in.net);
  std::string fp = network_fingerprint(in.net);

  std::cout << "network fingerprint: " << fp << "\n";
  json nodes = json::array();
  for (const auto& eq : in.net.equilibria) {
    std::cout << "node " << eq.label << ": u=" << eq.u() << " s=" << eq.s();
    try {
      DerivedConstants dc = derive_constants(eq);
      std::cout << " mu=" << fmt_double(dc.mu) << " alpha="
                << (dc.alpha_infinite() ? "inf" : fmt_double(dc.alpha))
                << " rho=" << fmt_double(dc.rho) << "\n";
      nodes.push_back({{"label", eq.label},
                       {"u", eq.u()},
                       {"s", eq.s()},
                       {"mu", dc.mu},
                       {"alpha", dc.alpha},
                       {"alpha_infinite", dc.alpha_infinite()},
                       {"beta", dc.beta},
                       {"rho", dc.rho}});
    } catch (const Error& e) {
      std::cout << " malformed eigenvalue lists (" << e.what() << ")\n";
      nodes.push_back({{"label", eq.label}, {"error", e.what()}});
    }
  }

  json seq_json;
  try {
    auto seq = principal_sequence(in.net);
    std::cout << "principal sequence:";
    for (const auto& s : seq) std::cout << " " << s;
    std::cout << "\n";
    seq_json = seq;
  } catch (const Error&) {
    std::cout << "principal sequence: unavailable\n";
  }

  if (rep.passed) {
    std::cout << "PASSED\n";
  } else {
    for (const auto& v : rep.violations)
      std::cout << "VIOLATION " << v.hypothesis << ": " << v.detail << "\n";
  }
  for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";

  Artifact a;
  a.command = "validate";
  a.config = {{"network", network_to_json(in.net)},
              {"source", in.is_glv ? "glv" : "network"}};
  a.network_fingerprint = fp;
  a.checks = {hypotheses_check(rep, "hypotheses")};
  a.results = {{"validation", to_json(rep)},
               {"nodes", nodes},
               {"principal_sequence", seq_json}};
  emit_artifact(cfg, std::move(a));
  return rep.passed ? 0 : 1;
}

int cmd_flight(const RunConfig& cfg) {
  if (cfg.lambdas.empty() || cfg.x.empty())
    fail(ErrorCode::UsageError, "flight needs --lambdas and --x");
  if (cfg.lambdas.size() != cfg.x.size())
    fail(ErrorCode::UsageError, "--lambdas and --x must have equal length");
  Eigen::VectorXd x = to_eigen(cfg.x);
  double T = time_of_flight(x, cfg.lambdas);
  Eigen::VectorXd tv = tau(x, cfg.lambdas);
  double sum = 0.0;
  for (int j = 0; j < x.size(); ++j) sum += x[j] * x[j] * std::exp(2.0 * cfg.lambdas[j] * T);
  double lo = -std::log(x.norm()) / cfg.lambdas.front();
  double hi = -std::log(x.norm()) / cfg.lambdas.back();

  std::cout << "T = " << fmt_double(T) << "\n";
  std::cout << "tau =";
  for (int j = 0; j < tv.size(); ++j) std::cout << " " << fmt_double(tv[j]);
  std::cout << "\nresidual = " << fmt_double(std::abs(sum - 1.0)) << "\n";
  std::cout << "bracket = [" << fmt_double(lo) << ", " << fmt_double(hi) << "]\n";

  Artifact a;
  a.command = "flight";
  a.config = {{"lambdas", cfg.lambdas}, {"x", cfg.x}};
  a.results = {{"T", T},
               {"tau", vec_json(tv)},
               {"residual", std::abs(sum - 1.0)},
               {"bracket", {lo, hi}}};
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_transit(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  SectionMaps maps(in.net, in.edge_maps);
  std::string node = cfg.node.empty() ? maps.sequence().front() : cfg.node;
  if (cfg.x.empty() || cfg.y.empty()) fail(ErrorCode::UsageError, "transit needs --x and --y");
  InSectionPoint p;
  p.node = node;
  p.x = to_eigen(cfg.x);
  p.y = to_eigen(cfg.y);
  if (p.y.norm() == 0.0) fail(ErrorCode::UsageError, "--y must be a nonzero direction");
  p.y.normalize();

  InSectionPoint out = maps.transition_map(p);
  std::cout << "node " << out.node << "\nx =";
  for (int j = 0; j < out.x.size(); ++j) std::cout << " " << fmt_double(out.x[j]);
  std::cout << "\ny =";
  for (int j = 0; j < out.y.size(); ++j) std::cout << " " << fmt_double(out.y[j]);
  std::cout << "\n";

  std::string csv = section_points_csv({p, out});
  if (!cfg.out_csv.empty()) write_text(cfg.out_csv, csv);

  Artifact a;
  a.command = "transit";
  a.config = {{"network", network_to_json(in.net)},
              {"node", node},
              {"x", cfg.x},
              {"y", vec_json(p.y)}};
  a.network_fingerprint = network_fingerprint(in.net);
  a.results = {{"node", out.node}, {"x", vec_json(out.x)}, {"y", vec_json(out.y)}};
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_wedge(const RunConfig& cfg) {
  if (cfg.lambdas.empty() || cfg.x.empty())
    fail(ErrorCode::UsageError, "wedge needs --lambdas and --x");
  if (cfg.lambdas.size() != cfg.x.size())
    fail(ErrorCode::UsageError, "--lambdas and --x must have equal length");
  double eps = pick(cfg.eps, 0.5);
  Eigen::VectorXd x = to_eigen(cfg.x);
  double defect = wedge_defect(x, cfg.lambdas);
  bool member = wedge_membership(x, cfg.lambdas, eps);
  std::cout << "defect = " << fmt_double(defect) << "\n";
  std::cout << "member(eps=" << fmt_double(eps) << ") = " << (member ? "true" : "false") << "\n";

  Artifact a;
  a.command = "wedge";
  a.config = {{"lambdas", cfg.lambdas}, {"x", cfg.x}, {"eps", eps}};
  a.results = {{"defect", defect}, {"member", member}};
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_measure(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  double eps = pick(cfg.eps, 0.5);
  double delta = pick(cfg.delta, 0.01);
  long long n = cfg.n > 0 ? cfg.n : 1000000;
  std::uint64_t seed = cfg.has_seed ? cfg.seed : 1;

  std::vector<std::string> nodes;
  if (!cfg.node.empty()) {
    if (in.net.index_of(cfg.node) < 0)
      fail(ErrorCode::ConfigError, "unknown node: " + cfg.node);
    nodes.push_back(cfg.node);
  } else {
    nodes = principal_sequence(in.net);
  }

  std::vector<MeasureEstimate> rows;
  for (size_t i = 0; i < nodes.size(); ++i)
    rows.push_back(estimate_wedge_complement_ratio(
        in.net.at(nodes[i]), eps, delta, n,
        split_seed(seed, static_cast<std::uint64_t>(i)), cfg.workers));

  std::string csv = measure_csv(rows);
  std::cout << csv;
  if (!cfg.out_csv.empty()) write_text(cfg.out_csv, csv);

  CheckResult mc;
  mc.kind = "measure";
  mc.name = "wedge-complement-measure";
  mc.status = CheckStatus::Pass;
  for (const auto& r : rows) {
    if (!std::isnan(r.analytic_bound) && r.ratio > r.analytic_bound + 3.0 * r.half_width) {
      mc.status = CheckStatus::Fail;
      mc.detail = "node " + r.node + ": ratio " + fmt_double(r.ratio) + " exceeds bound " +
                  fmt_double(r.analytic_bound) + " + 3 half-widths";
      break;
    }
    if (r.wide_ci && mc.status == CheckStatus::Pass) {
      mc.status = CheckStatus::Warn;
      mc.detail = "node " + r.node + ": wide confidence interval";
    }
  }
  if (mc.detail.empty()) mc.detail = "all ratios within analytic bounds";

  json results = json::array();
  for (const auto& r : rows) results.push_back(to_json(r));

  Artifact a;
  a.command = "measure";
  a.seed = seed;
  a.config = {{"network", network_to_json(in.net)},
              {"eps", eps},
              {"delta", delta},
              {"n", n},
              {"seed", seed},
              {"nodes", nodes}};
  a.network_fingerprint = network_fingerprint(in.net);
  a.checks = {mc};
  a.results = {{"rows", results}};
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_scaling(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  double eps = pick(cfg.eps, 0.5);
  long long n = cfg.n > 0 ? cfg.n : 1000000;
  std::uint64_t seed = cfg.has_seed ? cfg.seed : 1;
  std::vector<double> deltas =
      cfg.deltas.empty() ? std::vector<double>{0.02, 0.01, 0.005, 0.0025} : cfg.deltas;

  std::string node = cfg.node;
  if (node.empty()) {
    auto seq = principal_sequence(in.net);
    node = seq.front();
    for (const auto& lbl : seq)
      if (in.net.at(lbl).u() >= 2) {
        node = lbl;
        break;
      }
  } else if (in.net.index_of(node) < 0) {
    fail(ErrorCode::ConfigError, "unknown node: " + node);
  }

  ScalingStudy study = delta_scaling_study(in.net.at(node), eps, deltas, n, seed, cfg.workers);

  std::string csv = measure_csv(study.cells);
  std::cout << csv;
  std::cout << "slope = " << fmt_double(study.slope)
            << " (expected alpha-1 = " << fmt_double(study.expected_slope)
            << ", used " << study.used_cells << " cells)\n";
  if (!study.note.empty()) std::cout << "note: " << study.note << "\n";
  if (!cfg.out_csv.empty()) write_text(cfg.out_csv, csv);

  CheckResult sc;
  sc.kind = "measure";
  sc.name = "delta-scaling";
  if (study.vacuous) {
    sc.status = CheckStatus::Pass;
    sc.detail = "vacuous: single expanding direction";
  } else if (std::isnan(study.slope)) {
    sc.status = CheckStatus::Warn;
    sc.detail = "slope undefined: " + study.note;
  } else if (study.slope >= study.expected_slope - 0.3) {
    sc.status = CheckStatus::Pass;
    sc.detail = "slope " + fmt_double(study.slope) + " within 0.3 of " +
                fmt_double(study.expected_slope);
  } else {
    sc.status = CheckStatus::Fail;
    sc.detail = "slope " + fmt_double(study.slope) + " below " +
                fmt_double(study.expected_slope) + " - 0.3";
  }

  Artifact a;
  a.command = "scaling";
  a.seed = seed;
  a.config = {{"network", network_to_json(in.net)},
              {"node", node},
              {"eps", eps},
              {"deltas", deltas},
              {"n", n},
              {"seed", seed}};
  a.network_fingerprint = network_fingerprint(in.net);
  a.checks = {sc};
  a.results = to_json(study);
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_omega(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  SectionMaps maps(in.net, in.edge_maps);
  const std::string start_node = maps.sequence().front();
  const EquilibriumSpec& eq = in.net.at(start_node);

  InSectionPoint start;
  start.node = start_node;
  if (!cfg.x.empty()) {
    if (static_cast<int>(cfg.x.size()) != eq.u())
      fail(ErrorCode::UsageError, "--x must have the node's expanding dimension");
    start.x = to_eigen(cfg.x);
  } else {
    double r = pick(cfg.norm, 0.1);
    if (!(r > 0.0 && r < 1.0)) fail(ErrorCode::UsageError, "--norm must lie in (0,1)");
    start.x = Eigen::VectorXd::Zero(eq.u());
    start.x[0] = r;
  }
  if (!cfg.y.empty()) {
    if (static_cast<int>(cfg.y.size()) != eq.s())
      fail(ErrorCode::UsageError, "--y must have the node's stable dimension");
    start.y = to_eigen(cfg.y);
    if (start.y.norm() == 0.0) fail(ErrorCode::UsageError, "--y must be nonzero");
    start.y.normalize();
  } else {
    start.y = maps.landmarks_into(0).y_plus;
  }

  OmegaOrbit orbit = iterate_return_map(maps, start, cfg.loops);

  std::string csv = omega_csv(orbit);
  std::cout << csv;
  std::cout << "rho_loop = " << fmt_double(orbit.rho_loop)
            << ", zeta_loop = " << fmt_double(orbit.zeta_loop) << "\n";
  if (orbit.status == OrbitStatus::Escaped)
    std::cout << "ESCAPED at loop " << orbit.escape_loop << "\n";
  if (orbit.status == OrbitStatus::AlreadyConverged) std::cout << "ALREADY_CONVERGED\n";
  if (!orbit.note.empty()) std::cout << "note: " << orbit.note << "\n";
  if (!cfg.out_csv.empty()) write_text(cfg.out_csv, csv);

  CheckResult cc;
  cc.kind = "contraction";
  cc.name = "return-map-contraction";
  if (orbit.status == OrbitStatus::Escaped) {
    cc.status = CheckStatus::Fail;
    cc.detail = "orbit escaped the chart at loop " + std::to_string(orbit.escape_loop);
  } else {
    cc.status = CheckStatus::Pass;
    cc.detail = "x norms nonincreasing after the first iterate";
    for (size_t k = 2; k < orbit.x_norms.size(); ++k) {
      if (orbit.x_norms[k] > orbit.x_norms[k - 1] * (1.0 + 1e-12)) {
        cc.status = CheckStatus::Fail;
        cc.detail = "x norm grew at loop " + std::to_string(k);
        break;
      }
    }
  }

  Artifact a;
  a.command = "omega";
  a.config = {{"network", network_to_json(in.net)},
              {"x", vec_json(start.x)},
              {"y", vec_json(start.y)},
              {"loops", cfg.loops}};
  a.network_fingerprint = network_fingerprint(in.net);
  a.checks = {cc};
  a.results = to_json(orbit);
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_glv_sim(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  if (!in.is_glv) fail(ErrorCode::ConfigError, "glv-sim needs a GLV config");
  if (cfg.x0.empty()) fail(ErrorCode::UsageError, "glv-sim needs --x0");
  if (static_cast<int>(cfg.x0.size()) != in.sys.dim())
    fail(ErrorCode::UsageError, "--x0 must have dim entries");
  Eigen::VectorXd x0 = to_eigen(cfg.x0);
  for (int i = 0; i < x0.size(); ++i)
    if (x0[i] < 0.0) fail(ErrorCode::UsageError, "--x0 must be nonnegative");

  const json* exp_block =
      in.doc.contains("experiment") ? &in.doc.at("experiment") : nullptr;
  double t_max = pick(cfg.t_max, exp_block && exp_block->contains("t_max")
                                     ? exp_block->at("t_max").get<double>()
                                     : 100.0);
  double eps = pick(cfg.eps, exp_block && exp_block->contains("eps")
                                 ? exp_block->at("eps").get<double>()
                                 : 0.2);

  IntegrateOptions opt;
  Trajectory traj = integrate(in.sys, x0, t_max, opt);

  std::vector<std::string> labels;
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < in.gnet.net.principal_length; ++i) {
    labels.push_back(in.gnet.net.equilibria[i].label);
    points.push_back(in.gnet.node_state[i]);
  }
  Itinerary itin = detect_itinerary(traj, labels, points, eps);

  std::cout << "status = "
            << (traj.status == OdeStatus::StepUnderflow ? "STIFF_ABORT" : "completed")
            << ", t = " << fmt_double(traj.time_reached) << "\n";
  std::cout << "steps: accepted=" << traj.stats.accepted << " rejected=" << traj.stats.rejected
            << " min_step=" << fmt_double(traj.stats.min_step)
            << " max_step=" << fmt_double(traj.stats.max_step) << "\n";
  std::cout << "visits (" << itin.visits.size() << "):";
  size_t shown = std::min<size_t>(itin.visits.size(), 20);
  for (size_t i = 0; i < shown; ++i)
    std::cout << " " << itin.visits[i].label << "[" << fmt_double(itin.visits[i].entry) << ","
              << fmt_double(itin.visits[i].exit) << "]";
  if (shown < itin.visits.size()) std::cout << " ...";
  std::cout << "\n";

  if (!cfg.out_csv.empty()) write_text(cfg.out_csv, trajectory_csv(traj));

  Artifact a;
  a.command = "glv-sim";
  a.config = {{"glv", glv_config_json(in.sys)},
              {"x0", cfg.x0},
              {"t_max", t_max},
              {"eps", eps}};
  a.network_fingerprint = network_fingerprint(in.net);
  a.results = {{"status",
                traj.status == OdeStatus::StepUnderflow ? "STIFF_ABORT" : "COMPLETED"},
               {"time_reached", traj.time_reached},
               {"accepted", traj.stats.accepted},
               {"rejected", traj.stats.rejected},
               {"itinerary", to_json(itin)}};
  emit_artifact(cfg, std::move(a));
  return traj.status == OdeStatus::StepUnderflow ? 2 : 0;
}

int cmd_channel(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  ChannelParams params = resolve_channel_params(cfg, in);
  ChannelReport rep = channel_experiment(in.sys, in.gnet, params);
  print_channel(rep);

  Artifact a;
  a.command = "channel";
  a.seed = params.seed;
  a.config = channel_config_json(in.sys, params);
  a.config["threshold"] = cfg.threshold;
  a.network_fingerprint = network_fingerprint(in.net);
  a.checks = {hypotheses_check(rep.validation, "hypotheses"),
              channel_check(rep, cfg.threshold, "channel-following")};
  a.results = to_json(rep);
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_perturb(const RunConfig& cfg) {
  LoadedInput in = load_input(cfg.input);
  ChannelParams params = resolve_channel_params(cfg, in);
  if (cfg.count < 1) fail(ErrorCode::UsageError, "--count must be at least 1");
  auto reports = perturb_and_redetect(in.sys, cfg.magnitude, cfg.count, params);

  int flagged = 0;
  double min_fraction = 1.0;
  for (const auto& r : reports) {
    std::cout << (r.index == 0 ? "baseline " : "perturbation ") << r.index << ": fraction = "
              << fmt_double(r.channel.fraction)
              << (r.revalidated ? "" : "  [hypotheses flagged]") << "\n";
    if (!r.revalidated) ++flagged;
    if (r.revalidated) min_fraction = std::min(min_fraction, r.channel.fraction);
  }

  CheckResult pc;
  pc.kind = "channel";
  pc.name = "perturbation-robustness";
  if (flagged == static_cast<int>(reports.size())) {
    pc.status = CheckStatus::Warn;
    pc.detail = "every perturbation broke the hypotheses";
  } else if (min_fraction < cfg.threshold) {
    pc.status = CheckStatus::Fail;
    pc.detail = "revalidated fraction dropped to " + fmt_double(min_fraction);
  } else if (flagged > 0) {
    pc.status = CheckStatus::Warn;
    pc.detail = std::to_string(flagged) + " perturbation(s) flagged by validation";
  } else {
    pc.status = CheckStatus::Pass;
    pc.detail = "all revalidated, min fraction " + fmt_double(min_fraction);
  }

  json results = json::array();
  for (const auto& r : reports) results.push_back(to_json(r));

  Artifact a;
  a.command = "perturb";
  a.seed = params.seed;
  a.config = channel_config_json(in.sys, params);
  a.config["magnitude"] = cfg.magnitude;
  a.config["count"] = cfg.count;
  a.config["threshold"] = cfg.threshold;
  a.network_fingerprint = network_fingerprint(in.net);
  a.checks = {pc};
  a.results = {{"reports", results}};
  emit_artifact(cfg, std::move(a));
  return 0;
}

int cmd_verdict(const RunConfig& cfg) {
  if (cfg.inputs.empty())
    fail(ErrorCode::UsageError, "verdict needs at least one artifact path");
  std::vector<json> docs;
  for (const auto& p : cfg.inputs) docs.push_back(load_json_file(p));
  json bundle = report_bundle(docs);

  std::cout << "verdict: " << bundle.at("verdict").at("verdict").get<std::string>() << "\n";
  std::cout << "rationale: " << bundle.at("verdict").at("rationale").get<std::string>() << "\n";

  if (!cfg.out_json.empty()) write_text(cfg.out_json, bundle.dump(2) + "\n");

  for (const auto& c : bundle.at("verdict").at("checks"))
    if (c.at("kind") == "hypotheses" && c.at("status") == "FAIL") return 1;
  return 0;
}

}  // namespace

json artifact_to_json(const Artifact& a) {
  json checks = json::array();
  for (const auto& c : a.checks) checks.push_back(to_json(c));
  return {{"schema_version", 1},
          {"command", a.command},
          {"seed", a.seed},
          {"config", a.config},
          {"config_hash", a.config_hash},
          {"network_fingerprint", a.network_fingerprint},
          {"checks", checks},
          {"results", a.results}};
}

Artifact artifact_from_json(const json& j) {
  if (!j.is_object() || !j.contains("command") || !j.contains("checks"))
    fail(ErrorCode::ConfigError, "not a report artifact (missing command/checks)");
  Artifact a;
  a.command = j.at("command").get<std::string>();
  a.seed = j.value("seed", 0ULL);
  a.config = j.value("config", json::object());
  a.config_hash = j.value("config_hash", std::string{});
  a.network_fingerprint = j.value("network_fingerprint", std::string{});
  a.results = j.value("results", json::object());
  for (const auto& c : j.at("checks")) {
    CheckResult r;
    r.kind = c.value("kind", std::string{});
    r.name = c.value("name", std::string{});
    r.detail = c.value("detail", std::string{});
    std::string st = c.value("status", std::string{"MISSING"});
    r.status = st == "PASS"   ? CheckStatus::Pass
               : st == "FAIL" ? CheckStatus::Fail
               : st == "WARN" ? CheckStatus::Warn
                              : CheckStatus::Missing;
    a.checks.push_back(std::move(r));
  }
  return a;
}

json report_bundle(const std::vector<json>& artifacts) {
  if (artifacts.empty()) fail(ErrorCode::UsageError, "no artifacts to merge");
  std::vector<Artifact> parsed;
  for (const auto& doc : artifacts) parsed.push_back(artifact_from_json(doc));

  std::string fp;
  for (const auto& a : parsed) {
    if (a.network_fingerprint.empty()) continue;
    if (fp.empty()) fp = a.network_fingerprint;
    if (a.network_fingerprint != fp)
      fail(ErrorCode::ConfigError,
           "refusing to merge artifacts from different networks (fingerprint " + fp +
               " vs " + a.network_fingerprint + ")");
  }

  std::vector<CheckResult> checks;
  json inputs = json::array();
  json hashes = json::array();
  for (const auto& a : parsed) {
    for (const auto& c : a.checks) checks.push_back(c);
    inputs.push_back({{"command", a.command}, {"seed", a.seed}, {"config_hash", a.config_hash}});
    hashes.push_back(a.config_hash);
  }
  StabilityVerdict sv = stability_verdict(checks);

  json bundle = {{"schema_version", 1},
                 {"command", "verdict"},
                 {"network_fingerprint", fp},
                 {"inputs", inputs},
                 {"config_hash", config_hash(json{{"artifact_hashes", hashes}})},
                 {"verdict", to_json(sv)}};
  return bundle;
}

int run(const RunConfig& cfg) {
  try {
    switch (cfg.command) {
      case Command::Validate: return cmd_validate(cfg);
      case Command::Flight: return cmd_flight(cfg);
      case Command::Transit: return cmd_transit(cfg);
      case Command::Wedge: return cmd_wedge(cfg);
      case Command::Measure: return cmd_measure(cfg);
      case Command::Scaling: return cmd_scaling(cfg);
      case Command::Omega: return cmd_omega(cfg);
      case Command::GlvSim: return cmd_glv_sim(cfg);
      case Command::Channel: return cmd_channel(cfg);
      case Command::Perturb: return cmd_perturb(cfg);
      case Command::Verdict: return cmd_verdict(cfg);
    }
    return 3;
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::UsageError:
        return 3;
      case ErrorCode::HypothesisError:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace hetnet
