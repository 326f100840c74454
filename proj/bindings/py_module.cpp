// Python surface for the core operations. Reports cross the boundary as JSON
// text; the package wrapper parses them into dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "hetnet/errors.hpp"
#include "hetnet/glv.hpp"
#include "hetnet/json_io.hpp"
#include "hetnet/local_maps.hpp"
#include "hetnet/measure.hpp"
#include "hetnet/network.hpp"

namespace py = pybind11;
using namespace hetnet;

namespace {

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

EquilibriumSpec make_eq(const std::vector<double>& expanding,
                        const std::vector<double>& contracting) {
  EquilibriumSpec eq;
  eq.label = "node";
  eq.lambda_expanding = expanding;
  eq.lambda_contracting = contracting;
  return eq;
}

GLVSystem glv_from_text(const std::string& text) {
  return glv_from_json(nlohmann::json::parse(text));
}

void bind_network(py::module_& m) {
  m.def("derive_constants", [](const std::vector<double>& expanding,
                               const std::vector<double>& contracting) {
    DerivedConstants c = derive_constants(make_eq(expanding, contracting));
    py::dict d;
    d["alpha"] = c.alpha;
    d["beta"] = c.beta;
    d["mu"] = c.mu;
    d["rho"] = c.rho;
    return d;
  });
  m.def("validate_network", [](const std::string& text) {
    NetworkSpec net = network_from_json(nlohmann::json::parse(text));
    nlohmann::json out = to_json(validate_hypotheses(net));
    out["network_fingerprint"] = network_fingerprint(net);
    return out.dump();
  });
  m.def("principal_sequence", [](const std::string& text) {
    return principal_sequence(network_from_json(nlohmann::json::parse(text)));
  });
}

void bind_local(py::module_& m) {
  m.def("time_of_flight",
        [](const std::vector<double>& x, const std::vector<double>& lambdas) {
          return time_of_flight(to_vec(x), lambdas);
        });
  m.def("tau", [](const std::vector<double>& x, const std::vector<double>& lambdas) {
    return from_vec(tau(to_vec(x), lambdas));
  });
  m.def("wedge_defect", [](const std::vector<double>& x, const std::vector<double>& lambdas) {
    return wedge_defect(to_vec(x), lambdas);
  });
  m.def("wedge_membership", [](const std::vector<double>& x,
                               const std::vector<double>& lambdas, double eps) {
    return wedge_membership(to_vec(x), lambdas, eps);
  });
  m.def("local_map", [](const std::vector<double>& expanding,
                        const std::vector<double>& contracting,
                        const std::vector<double>& x, const std::vector<double>& y) {
    InSectionPoint p{"node", to_vec(x), to_vec(y)};
    OutSectionPoint q = local_map(p, make_eq(expanding, contracting));
    py::dict d;
    d["phi"] = from_vec(q.phi);
    d["y"] = from_vec(q.y);
    return d;
  });
  m.def("omega_orbit", [](const std::string& text, double norm, int loops) {
    NetworkSpec net = network_from_json(nlohmann::json::parse(text));
    SectionMaps maps(net);
    InSectionPoint start;
    start.node = maps.sequence().front();
    int u = net.at(start.node).u();
    start.x = Eigen::VectorXd::Zero(u);
    start.x[0] = norm;
    start.y = maps.landmarks_into(0).y_plus;
    return to_json(iterate_return_map(maps, start, loops)).dump();
  });
}

void bind_measure(py::module_& m) {
  m.def("estimate_wedge_ratio",
        [](const std::vector<double>& expanding, const std::vector<double>& contracting,
           double eps, double delta, long long n, std::uint64_t seed) {
          return to_json(estimate_wedge_complement_ratio(make_eq(expanding, contracting),
                                                         eps, delta, n, seed))
              .dump();
        });
  m.def("delta_scaling",
        [](const std::vector<double>& expanding, const std::vector<double>& contracting,
           double eps, const std::vector<double>& deltas, long long n, std::uint64_t seed) {
          return to_json(
                     delta_scaling_study(make_eq(expanding, contracting), eps, deltas, n, seed))
              .dump();
        });
  m.def("check_lemmas", [](long long n, std::uint64_t seed) {
    LemmaCheckReport rep = check_lemma_inequalities(n, seed);
    py::dict d;
    d["n_samples"] = rep.n_samples;
    d["checked"] = rep.checked;
    d["passed"] = rep.passed;
    d["violations"] = rep.violations_bracket + rep.violations_defect_bound +
                      rep.violations_cone_bound + rep.violations_exit_bound;
    return d;
  });
}

void bind_glv(py::module_& m) {
  m.def("glv_validate", [](const std::string& text) {
    GLVSystem sys = glv_from_text(text);
    GLVNetwork gnet = network_from_glv(sys);
    nlohmann::json out = to_json(validate_hypotheses(gnet.net));
    out["network"] = network_to_json(gnet.net);
    out["network_fingerprint"] = network_fingerprint(gnet.net);
    return out.dump();
  });
  m.def("glv_itinerary", [](const std::string& text, const std::vector<double>& x0,
                            double t_max, double eps) {
    GLVSystem sys = glv_from_text(text);
    GLVNetwork gnet = network_from_glv(sys);
    IntegrateOptions opt;
    Trajectory traj = integrate(sys, to_vec(x0), t_max, opt);
    std::vector<Eigen::VectorXd> points;
    std::vector<std::string> labels;
    for (int i = 0; i < gnet.net.principal_length; ++i) {
      points.push_back(gnet.node_state[i]);
      labels.push_back(gnet.net.equilibria[i].label);
    }
    return to_json(detect_itinerary(traj, labels, points, eps)).dump();
  });
  m.def("glv_channel", [](const std::string& text, std::optional<int> n_override) {
    nlohmann::json doc = nlohmann::json::parse(text);
    GLVSystem sys = glv_from_json(doc);
    GLVNetwork gnet = network_from_glv(sys);
    ChannelParams params = channel_params_from_json(doc.at("experiment"), sys.dim());
    if (n_override) params.n_samples = *n_override;
    return to_json(channel_experiment(sys, gnet, params)).dump();
  });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "heteroclinic network laboratory core";
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string msg = std::string(error_code_name(e.code())) + ": " + e.what();
      PyErr_SetString(PyExc_RuntimeError, msg.c_str());
    }
  });
  bind_network(m);
  bind_local(m);
  bind_measure(m);
  bind_glv(m);
}
