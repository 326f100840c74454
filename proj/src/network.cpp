#include "hetnet/network.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "hetnet/errors.hpp"

namespace hetnet {

namespace {

constexpr double kHyperbolicTol = 1e-9;
constexpr double kResonanceRelTol = 1e-9;

void check_structure(const EquilibriumSpec& eq) {
  if (eq.lambda_expanding.empty())
    fail(ErrorCode::ConfigError, "equilibrium '" + eq.label + "' has no expanding eigenvalue");
  if (eq.lambda_contracting.empty())
    fail(ErrorCode::ConfigError, "equilibrium '" + eq.label + "' has no contracting eigenvalue");
  for (double v : eq.lambda_expanding)
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::ConfigError, "expanding rates must be positive finite ('" + eq.label + "')");
  for (double v : eq.lambda_contracting)
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::ConfigError,
           "contracting magnitudes must be positive finite ('" + eq.label + "')");
  for (size_t i = 1; i < eq.lambda_expanding.size(); ++i)
    if (!(eq.lambda_expanding[i - 1] > eq.lambda_expanding[i]))
      fail(ErrorCode::ConfigError,
           "expanding rates must be strictly descending ('" + eq.label + "')");
  for (size_t i = 1; i < eq.lambda_contracting.size(); ++i)
    if (!(eq.lambda_contracting[i - 1] < eq.lambda_contracting[i]))
      fail(ErrorCode::ConfigError,
           "contracting magnitudes must be strictly ascending ('" + eq.label + "')");
}

std::vector<double> signed_spectrum(const EquilibriumSpec& eq) {
  std::vector<double> all;
  all.reserve(eq.ambient_dim());
  for (double v : eq.lambda_expanding) all.push_back(v);
  for (double v : eq.lambda_contracting) all.push_back(-v);
  return all;
}

bool nearly_equal(double a, double b, double scale) {
  return std::abs(a - b) <= kResonanceRelTol * scale;
}

}  // namespace

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
    case ErrorCode::UsageError: return "USAGE_ERROR";
    case ErrorCode::HypothesisError: return "HYPOTHESIS_ERROR";
    case ErrorCode::OnStableManifold: return "ON_STABLE_MANIFOLD";
    case ErrorCode::OutsideChart: return "OUTSIDE_CHART";
    case ErrorCode::DegenerateGlobalMap: return "DEGENERATE_GLOBAL_MAP";
    case ErrorCode::EpsTooLarge: return "EPS_TOO_LARGE";
    case ErrorCode::StiffAbort: return "STIFF_ABORT";
    case ErrorCode::Escaped: return "ESCAPED";
  }
  return "UNKNOWN";
}

DerivedConstants derive_constants(const EquilibriumSpec& eq) {
  check_structure(eq);
  DerivedConstants c{};
  const double l1 = eq.lambda_expanding.front();
  if (eq.u() >= 2) {
    c.alpha = l1 / eq.lambda_expanding[1];
    c.beta = eq.lambda_expanding[1] / l1;
  } else {
    c.alpha = kAlphaInfinite;
    c.beta = 0.0;
  }
  c.mu = eq.lambda_contracting.front() / l1;
  c.rho = 0.5 * (1.0 + c.mu);
  return c;
}

int NetworkSpec::index_of(const std::string& label) const {
  for (int i = 0; i < size(); ++i)
    if (equilibria[i].label == label) return i;
  return -1;
}

const EquilibriumSpec& NetworkSpec::at(const std::string& label) const {
  int i = index_of(label);
  if (i < 0) fail(ErrorCode::ConfigError, "no equilibrium labeled '" + label + "'");
  return equilibria[i];
}

ValidationReport validate_hypotheses(const NetworkSpec& net) {
  ValidationReport rep;
  auto violate = [&rep](const std::string& h, const std::string& detail) {
    rep.violations.push_back({h, detail});
  };

  if (net.equilibria.empty()) {
    violate("H1", "network has no equilibria");
    rep.passed = false;
    return rep;
  }

  std::set<std::string> labels;
  int ambient = net.equilibria.front().ambient_dim();
  for (const auto& eq : net.equilibria) {
    if (!labels.insert(eq.label).second)
      violate("H1", "duplicate label '" + eq.label + "'");
    if (eq.ambient_dim() != ambient)
      violate("H1", "ambient dimension differs at '" + eq.label + "' (" +
                        std::to_string(eq.ambient_dim()) + " vs " + std::to_string(ambient) + ")");
    if (eq.lambda_expanding.empty())
      violate("H1", "'" + eq.label + "' has no expanding direction");
    if (eq.lambda_contracting.empty())
      violate("H1", "'" + eq.label + "' has no contracting direction");
    for (double v : signed_spectrum(eq))
      if (std::abs(v) <= kHyperbolicTol)
        violate("H1", "'" + eq.label + "' is not hyperbolic: |eigenvalue| <= 1e-9");

    // H2: ordering.
    for (size_t i = 1; i < eq.lambda_expanding.size(); ++i)
      if (!(eq.lambda_expanding[i - 1] > eq.lambda_expanding[i]))
        violate("H2", "expanding rates not strictly descending at '" + eq.label + "'");
    for (size_t i = 1; i < eq.lambda_contracting.size(); ++i)
      if (!(eq.lambda_contracting[i - 1] < eq.lambda_contracting[i]))
        violate("H2", "contracting magnitudes not strictly ascending at '" + eq.label + "'");
    for (double v : eq.lambda_expanding)
      if (!(v > 0.0)) violate("H2", "non-positive expanding rate at '" + eq.label + "'");
    for (double v : eq.lambda_contracting)
      if (!(v > 0.0)) violate("H2", "non-positive contracting magnitude at '" + eq.label + "'");

    // H2: resonance screen over the signed spectrum. Pairwise near-equality,
    // then target = sum of two distinct other entries.
    const auto spec = signed_spectrum(eq);
    const int n = static_cast<int>(spec.size());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (nearly_equal(spec[i], spec[j], std::max(std::abs(spec[i]), std::abs(spec[j])))) {
          std::ostringstream os;
          os << "resonance screen at '" << eq.label << "': eigenvalues " << spec[i] << " and "
             << spec[j] << " coincide";
          violate("H2", os.str());
        }
    for (int t = 0; t < n; ++t)
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          if (j == t || k == t) continue;
          double sum = spec[j] + spec[k];
          double scale = std::max(std::abs(spec[t]), std::abs(spec[j]) + std::abs(spec[k]));
          if (nearly_equal(spec[t], sum, scale)) {
            std::ostringstream os;
            os << "resonance screen at '" << eq.label << "': " << spec[t] << " = " << spec[j]
               << " + " << spec[k];
            violate("H2", os.str());
          }
        }
  }

  // Principal cycle bounds.
  int nstar = net.principal_length;
  if (nstar <= 0 || nstar > net.size()) {
    violate("H3", "principal_length " + std::to_string(nstar) + " out of range [1, " +
                      std::to_string(net.size()) + "]");
    nstar = 0;
  }
  if (nstar > 0 && nstar < net.size())
    rep.notes.push_back("principal cycle covers " + std::to_string(nstar) + " of " +
                        std::to_string(net.size()) + " equilibria; remainder is outside the "
                        "principal sequence (review)");

  // H3: strong connections close the principal cycle.
  for (int i = 0; i < nstar; ++i) {
    const std::string& src = net.equilibria[i].label;
    const std::string& dst = net.equilibria[(i + 1) % nstar].label;
    bool found = false;
    for (const auto& c : net.connections)
      if (c.source == src && c.target == dst && c.source_eigen_index == 1) found = true;
    if (!found)
      violate("H3", "missing strong connection " + src + " -> " + dst);
  }
  for (const auto& c : net.connections) {
    if (net.index_of(c.source) < 0 || net.index_of(c.target) < 0)
      violate("H3", "connection references unknown label '" +
                        (net.index_of(c.source) < 0 ? c.source : c.target) + "'");
    else if (c.source_eigen_index < 1 ||
             c.source_eigen_index > net.at(c.source).u())
      violate("H3", "connection " + c.source + " -> " + c.target +
                        " has eigen index out of range");
  }

  // H4: saddle values along the principal cycle.
  for (int i = 0; i < nstar; ++i) {
    const auto& eq = net.equilibria[i];
    if (eq.lambda_expanding.empty() || eq.lambda_contracting.empty()) continue;
    if (!(eq.lambda_expanding.front() > 0)) continue;
    double mu = eq.lambda_contracting.front() / eq.lambda_expanding.front();
    if (!(mu > 1.0)) {
      std::ostringstream os;
      os << "saddle value at '" << eq.label << "' is " << mu << " <= 1";
      violate("H4", os.str());
    }
  }

  rep.passed = rep.violations.empty();
  return rep;
}

std::vector<std::string> principal_sequence(const NetworkSpec& net) {
  if (net.principal_length <= 0 || net.principal_length > net.size())
    fail(ErrorCode::HypothesisError, "principal_length out of range");
  std::vector<std::string> seq;
  for (int i = 0; i < net.principal_length; ++i) {
    const std::string& src = net.equilibria[i].label;
    const std::string& dst = net.equilibria[(i + 1) % net.principal_length].label;
    bool found = false;
    for (const auto& c : net.connections)
      if (c.source == src && c.target == dst && c.source_eigen_index == 1) found = true;
    if (!found)
      fail(ErrorCode::HypothesisError, "strong-connection chain broken at " + src + " -> " + dst);
    seq.push_back(src);
  }
  return seq;
}

}  // namespace hetnet
