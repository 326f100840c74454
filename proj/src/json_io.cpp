#include "hetnet/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hetnet/errors.hpp"

namespace hetnet {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key, const char* ctx) {
  if (!j.is_object() || !j.contains(key))
    fail(ErrorCode::ConfigError, std::string("missing key '") + key + "' in " + ctx);
  return j.at(key);
}

double need_num(const json& j, const char* key, const char* ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number())
    fail(ErrorCode::ConfigError, std::string("key '") + key + "' in " + ctx + " must be a number");
  return v.get<double>();
}

long long opt_int(const json& j, const char* key, long long def) {
  if (!j.is_object() || !j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    fail(ErrorCode::ConfigError, std::string("key '") + key + "' must be an integer");
  return v.get<long long>();
}

double opt_num(const json& j, const char* key, double def) {
  if (!j.is_object() || !j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number())
    fail(ErrorCode::ConfigError, std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> num_list(const json& v, const char* what) {
  if (!v.is_array()) fail(ErrorCode::ConfigError, std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(ErrorCode::ConfigError, std::string(what) + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Eigen::MatrixXd matrix_from(const json& v, const char* what) {
  if (!v.is_array() || v.empty())
    fail(ErrorCode::ConfigError, std::string(what) + " must be a nonempty array of rows");
  size_t cols = 0;
  std::vector<std::vector<double>> rows;
  for (const auto& r : v) {
    rows.push_back(num_list(r, what));
    if (cols == 0) cols = rows.back().size();
    if (rows.back().size() != cols || cols == 0)
      fail(ErrorCode::ConfigError, std::string(what) + " rows must be equal nonzero length");
  }
  Eigen::MatrixXd m(rows.size(), cols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t c = 0; c < cols; ++c) m(i, c) = rows[i][c];
  return m;
}

void check_schema_version(const json& j, const char* ctx) {
  if (j.is_object() && j.contains("schema_version")) {
    const json& v = j.at("schema_version");
    if (!v.is_number_integer() || v.get<long long>() != 1)
      fail(ErrorCode::ConfigError, std::string("unsupported schema_version in ") + ctx);
  }
}

const char* orbit_status_name(OrbitStatus s) {
  switch (s) {
    case OrbitStatus::Completed: return "COMPLETED";
    case OrbitStatus::Escaped: return "ESCAPED";
    case OrbitStatus::AlreadyConverged: return "ALREADY_CONVERGED";
  }
  return "?";
}

}  // namespace

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, "parse error in " + path + ": " + e.what());
  }
}

NetworkSpec network_from_json(const json& j) {
  check_schema_version(j, "network config");
  NetworkSpec net;
  const json& eqs = need(j, "equilibria", "network config");
  if (!eqs.is_array() || eqs.empty())
    fail(ErrorCode::ConfigError, "equilibria must be a nonempty array");
  for (const auto& e : eqs) {
    EquilibriumSpec eq;
    const json& lbl = need(e, "label", "equilibrium");
    if (!lbl.is_string()) fail(ErrorCode::ConfigError, "equilibrium label must be a string");
    eq.label = lbl.get<std::string>();
    eq.lambda_expanding = num_list(need(e, "expanding", "equilibrium"), "expanding");
    eq.lambda_contracting = num_list(need(e, "contracting", "equilibrium"), "contracting");
    net.equilibria.push_back(std::move(eq));
  }
  if (j.contains("connections")) {
    for (const auto& c : j.at("connections")) {
      ConnectionSpec cs;
      cs.source = need(c, "source", "connection").get<std::string>();
      cs.target = need(c, "target", "connection").get<std::string>();
      cs.source_eigen_index = static_cast<int>(need_num(c, "index", "connection"));
      net.connections.push_back(std::move(cs));
    }
  }
  net.principal_length =
      static_cast<int>(opt_int(j, "principal_length", static_cast<long long>(net.size())));
  if (net.principal_length < 1 || net.principal_length > net.size())
    fail(ErrorCode::ConfigError, "principal_length must lie in [1, number of equilibria]");
  return net;
}

std::vector<std::optional<TransitionMap>> transition_maps_from_json(const json& j,
                                                                    const NetworkSpec& net) {
  std::vector<std::optional<TransitionMap>> maps;
  if (!j.is_object() || !j.contains("transition_maps")) return maps;
  auto seq = principal_sequence(net);
  maps.resize(seq.size());
  for (const auto& t : j.at("transition_maps")) {
    std::string src = need(t, "source", "transition map").get<std::string>();
    int edge = -1;
    for (size_t i = 0; i < seq.size(); ++i)
      if (seq[i] == src) edge = static_cast<int>(i);
    if (edge < 0)
      fail(ErrorCode::ConfigError, "transition map source '" + src + "' is not a principal node");
    maps[edge].emplace(matrix_from(need(t, "M", "transition map"), "M"),
                       matrix_from(need(t, "G", "transition map"), "G"));
  }
  return maps;
}

GLVSystem glv_from_json(const json& j) {
  check_schema_version(j, "GLV config");
  GLVSystem sys;
  const int dim = static_cast<int>(need_num(j, "dim", "GLV config"));
  if (dim < 3) fail(ErrorCode::ConfigError, "dim must be at least 3");
  auto growth = num_list(need(j, "growth", "GLV config"), "growth");
  if (static_cast<int>(growth.size()) != dim)
    fail(ErrorCode::ConfigError, "growth length must equal dim");
  sys.growth = Eigen::Map<Eigen::VectorXd>(growth.data(), dim);
  sys.interaction = matrix_from(need(j, "interaction", "GLV config"), "interaction");
  if (sys.interaction.rows() != dim || sys.interaction.cols() != dim)
    fail(ErrorCode::ConfigError, "interaction must be dim x dim");
  if (j.contains("labels")) {
    for (const auto& l : j.at("labels")) {
      if (!l.is_string()) fail(ErrorCode::ConfigError, "labels must be strings");
      sys.labels.push_back(l.get<std::string>());
    }
  }
  sys.check();
  return sys;
}

std::vector<ConnectionSpec> connections_from_json(const json& j) {
  std::vector<ConnectionSpec> out;
  if (!j.is_object() || !j.contains("connections")) return out;
  for (const auto& c : j.at("connections")) {
    ConnectionSpec cs;
    cs.source = need(c, "source", "connection").get<std::string>();
    cs.target = need(c, "target", "connection").get<std::string>();
    cs.source_eigen_index = static_cast<int>(need_num(c, "index", "connection"));
    out.push_back(std::move(cs));
  }
  return out;
}

ChannelParams channel_params_from_json(const json& j, int dim) {
  ChannelParams p;
  if (!j.is_object()) fail(ErrorCode::ConfigError, "experiment block must be an object");
  p.eps = opt_num(j, "eps", p.eps);
  p.delta = opt_num(j, "delta", p.delta);
  p.n_samples = static_cast<int>(opt_int(j, "n", p.n_samples));
  p.t_max = opt_num(j, "t_max", p.t_max);
  p.seed = static_cast<std::uint64_t>(opt_int(j, "seed", static_cast<long long>(p.seed)));
  p.workers = static_cast<int>(opt_int(j, "workers", p.workers));
  p.box_scale = opt_num(j, "box_scale", p.box_scale);
  p.rel_tol = opt_num(j, "rel_tol", p.rel_tol);
  p.abs_tol = opt_num(j, "abs_tol", p.abs_tol);
  p.max_step = opt_num(j, "max_step", p.max_step);
  const json& box = need(j, "box", "experiment");
  auto lo = num_list(need(box, "lo", "experiment box"), "box lo");
  auto hi = num_list(need(box, "hi", "experiment box"), "box hi");
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
    fail(ErrorCode::ConfigError, "experiment box lo/hi must have dim entries");
  for (int i = 0; i < dim; ++i)
    if (!(lo[i] <= hi[i])) fail(ErrorCode::ConfigError, "experiment box needs lo <= hi");
  p.box.lo = Eigen::Map<Eigen::VectorXd>(lo.data(), dim);
  p.box.hi = Eigen::Map<Eigen::VectorXd>(hi.data(), dim);
  return p;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const json& config) { return hash_hex(fnv1a64(config.dump())); }

std::string network_fingerprint(const NetworkSpec& net) {
  return hash_hex(fnv1a64(network_to_json(net).dump()));
}

std::string fmt_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::string measure_csv(const std::vector<MeasureEstimate>& rows) {
  std::string out = "node,eps,delta,ratio,half_width,bound,n,seed\n";
  for (const auto& r : rows) {
    out += r.node + "," + fmt_double(r.eps) + "," + fmt_double(r.delta) + "," +
           fmt_double(r.ratio) + "," + fmt_double(r.half_width) + ",";
    if (!std::isnan(r.analytic_bound)) out += fmt_double(r.analytic_bound);
    out += "," + std::to_string(r.n_samples) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

std::string omega_csv(const OmegaOrbit& orbit) {
  std::string out = "loop,x_norm,wedge_defect,dist_to_y_plus\n";
  for (size_t i = 0; i < orbit.x_norms.size(); ++i)
    out += std::to_string(i) + "," + fmt_double(orbit.x_norms[i]) + "," +
           fmt_double(orbit.wedge_defects[i]) + "," + fmt_double(orbit.dist_to_y_plus[i]) +
           "\n";
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  int dim = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  for (int i = 1; i <= dim; ++i) out += ",x" + std::to_string(i);
  out += "\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    out += fmt_double(traj.times[k]);
    for (int i = 0; i < dim; ++i) out += "," + fmt_double(traj.states[k][i]);
    out += "\n";
  }
  return out;
}

std::string section_points_csv(const std::vector<InSectionPoint>& points) {
  std::string out = "node";
  if (!points.empty()) {
    for (int i = 1; i <= points.front().x.size(); ++i) out += ",x" + std::to_string(i);
    for (int i = 1; i <= points.front().y.size(); ++i) out += ",y" + std::to_string(i);
  }
  out += "\n";
  for (const auto& p : points) {
    out += p.node;
    for (int i = 0; i < p.x.size(); ++i) out += "," + fmt_double(p.x[i]);
    for (int i = 0; i < p.y.size(); ++i) out += "," + fmt_double(p.y[i]);
    out += "\n";
  }
  return out;
}

json network_to_json(const NetworkSpec& net) {
  json eqs = json::array();
  for (const auto& e : net.equilibria)
    eqs.push_back({{"label", e.label},
                   {"expanding", e.lambda_expanding},
                   {"contracting", e.lambda_contracting}});
  json conns = json::array();
  for (const auto& c : net.connections)
    conns.push_back(
        {{"source", c.source}, {"target", c.target}, {"index", c.source_eigen_index}});
  return {{"schema_version", 1},
          {"equilibria", eqs},
          {"connections", conns},
          {"principal_length", net.principal_length}};
}

json to_json(const ValidationReport& rep) {
  json v = json::array();
  for (const auto& viol : rep.violations)
    v.push_back({{"hypothesis", viol.hypothesis}, {"detail", viol.detail}});
  return {{"passed", rep.passed}, {"violations", v}, {"notes", rep.notes}};
}

json to_json(const MeasureEstimate& est) {
  return {{"node", est.node},
          {"eps", est.eps},
          {"delta", est.delta},
          {"ratio", est.ratio},
          {"half_width", est.half_width},
          {"n", est.n_samples},
          {"hits", est.hits},
          {"seed", est.seed},
          {"bound", est.analytic_bound},
          {"bound_corrected", est.bound_corrected},
          {"wide_ci", est.wide_ci},
          {"note", est.note}};
}

json to_json(const ScalingStudy& study) {
  json cells = json::array();
  for (const auto& c : study.cells) cells.push_back(to_json(c));
  return {{"node", study.node},
          {"eps", study.eps},
          {"cells", cells},
          {"slope", study.slope},
          {"expected_slope", study.expected_slope},
          {"used_cells", study.used_cells},
          {"vacuous", study.vacuous},
          {"note", study.note}};
}

json to_json(const OmegaOrbit& orbit) {
  return {{"x_norms", orbit.x_norms},
          {"wedge_defects", orbit.wedge_defects},
          {"dist_to_y_plus", orbit.dist_to_y_plus},
          {"status", orbit_status_name(orbit.status)},
          {"escape_loop", orbit.escape_loop},
          {"rho_loop", orbit.rho_loop},
          {"zeta_loop", orbit.zeta_loop},
          {"defect_exponent_single", orbit.defect_exponent_single},
          {"defect_exponent_composed", orbit.defect_exponent_composed},
          {"note", orbit.note}};
}

json to_json(const Itinerary& it) {
  json visits = json::array();
  for (const auto& v : it.visits)
    visits.push_back({{"label", v.label},
                      {"entry", v.entry},
                      {"exit", v.exit},
                      {"min_dist", v.min_dist}});
  return {{"visits", visits}, {"eps", it.eps}};
}

json to_json(const ChannelReport& rep) {
  return {{"n_initial", rep.n_initial},
          {"n_following", rep.n_following},
          {"n_left", rep.n_left},
          {"n_timeout", rep.n_timeout},
          {"n_aborted", rep.n_aborted},
          {"fraction", rep.fraction},
          {"eps", rep.eps},
          {"delta", rep.delta},
          {"t_max", rep.t_max},
          {"seed", rep.seed},
          {"sequence", rep.sequence},
          {"validation", to_json(rep.validation)},
          {"outcomes", rep.outcomes}};
}

json to_json(const PerturbationReport& rep) {
  return {{"index", rep.index},
          {"magnitude", rep.magnitude},
          {"revalidated", rep.revalidated},
          {"channel", to_json(rep.channel)}};
}

json to_json(const CheckResult& check) {
  return {{"kind", check.kind},
          {"name", check.name},
          {"status", check_status_name(check.status)},
          {"detail", check.detail}};
}

json to_json(const StabilityVerdict& verdict) {
  json checks = json::array();
  for (const auto& c : verdict.supporting) checks.push_back(to_json(c));
  return {{"verdict", verdict_name(verdict.verdict)},
          {"rationale", verdict.rationale},
          {"checks", checks}};
}

}  // namespace hetnet
