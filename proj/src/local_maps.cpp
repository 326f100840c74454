#include "hetnet/local_maps.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr double kGenericTol = 1e-12;

// sum_j x_j^2 exp(2 l_j T) - 1, with the exponent formed in log space so that
// points far inside the chart cannot overflow before the sum is compared to 1.
double flight_residual(const Eigen::VectorXd& x, const std::vector<double>& l, double T) {
  double acc = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    if (x[j] == 0.0) continue;
    double e = 2.0 * l[j] * T + 2.0 * std::log(std::abs(x[j]));
    if (e > 700.0) return std::numeric_limits<double>::infinity();
    acc += std::exp(e);
  }
  return acc - 1.0;
}

double flight_residual_deriv(const Eigen::VectorXd& x, const std::vector<double>& l, double T) {
  double acc = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    if (x[j] == 0.0) continue;
    double e = 2.0 * l[j] * T + 2.0 * std::log(std::abs(x[j]));
    if (e > 700.0) return std::numeric_limits<double>::infinity();
    acc += 2.0 * l[j] * std::exp(e);
  }
  return acc;
}

void check_lambdas(const std::vector<double>& l) {
  if (l.empty()) fail(ErrorCode::ConfigError, "empty expanding eigenvalue list");
  for (size_t i = 0; i < l.size(); ++i) {
    if (!(l[i] > 0.0) || !std::isfinite(l[i]))
      fail(ErrorCode::ConfigError, "expanding rates must be positive finite");
    if (i > 0 && !(l[i - 1] > l[i]))
      fail(ErrorCode::ConfigError, "expanding rates must be strictly descending");
  }
}

}  // namespace

double time_of_flight(const Eigen::VectorXd& x, const std::vector<double>& l) {
  check_lambdas(l);
  if (x.size() != static_cast<Eigen::Index>(l.size()))
    fail(ErrorCode::ConfigError, "x dimension does not match eigenvalue list");
  // stableNorm: plain norm() squares the components first, which loses the
  // bracket entirely once ||x|| drops under ~1e-154 (deep orbit iterates).
  const double nrm = x.stableNorm();
  if (nrm == 0.0) fail(ErrorCode::OnStableManifold, "x = 0 never reaches the outgoing section");
  if (nrm >= 1.0) fail(ErrorCode::OutsideChart, "||x|| >= 1 is outside the local chart");

  const double logn = std::log(nrm);  // < 0
  double lo = -logn / l.front();
  double hi = -logn / l.back();
  if (lo == hi) return lo;  // u = 1, exact

  // Bisection to a tight interval, then Newton polished to the residual
  // tolerance; Newton steps are rejected if they leave the bracket.
  double flo = flight_residual(x, l, lo);
  if (flo == 0.0) return lo;
  double fhi = flight_residual(x, l, hi);
  if (fhi == 0.0) return hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-9 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = flight_residual(x, l, mid);
    if (fm == 0.0) return mid;
    if (fm < 0.0)
      lo = mid, flo = fm;
    else
      hi = mid, fhi = fm;
  }
  // The residual is evaluated from exponents 2 l_j T + 2 log|x_j|; their
  // rounding noise grows linearly with |log||x|||, so for points many orders
  // below the section scale the 1e-12 target falls under the evaluation
  // noise floor. The stop tolerance tracks that floor.
  double exponent_scale = 1.0;
  for (int j = 0; j < x.size(); ++j)
    if (x[j] != 0.0)
      exponent_scale = std::max(exponent_scale, std::abs(2.0 * std::log(std::abs(x[j]))));
  const double tol =
      kResidualTol + 16.0 * std::numeric_limits<double>::epsilon() * exponent_scale;

  double T = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    double f = flight_residual(x, l, T);
    if (std::abs(f) <= tol) return T;
    double d = flight_residual_deriv(x, l, T);
    double step = f / d;
    double next = T - step;
    if (!(next > lo) || !(next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (flight_residual(x, l, next) < 0.0)
      lo = next;
    else
      hi = next;
    T = next;
  }
  if (std::abs(flight_residual(x, l, T)) > tol)
    fail(ErrorCode::OutsideChart, "flight-time solve did not reach residual tolerance");
  return T;
}

Eigen::VectorXd tau(const Eigen::VectorXd& x, const std::vector<double>& l) {
  const double T = time_of_flight(x, l);
  Eigen::VectorXd out(x.size());
  // Formed in log space: the bare factor exp(l_j T) overflows for denormal
  // components even though tau_j itself never exceeds 1.
  for (int j = 0; j < x.size(); ++j)
    out[j] = x[j] == 0.0
                 ? 0.0
                 : std::copysign(std::exp(l[j] * T + std::log(std::abs(x[j]))), x[j]);
  return out;
}

double wedge_defect(const Eigen::VectorXd& x, const std::vector<double>& l) {
  if (x.stableNorm() == 0.0) return 1.0;
  if (x.size() == 1) return 0.0;  // tau_1 = sign(x), exactly
  // 1 - tau_1^2 equals sum_{j>=2} tau_j^2 on the unit sphere; the sum form
  // stays accurate when tau_1 is within rounding of 1.
  Eigen::VectorXd t = tau(x, l);
  double s = 0.0;
  for (Eigen::Index j = 1; j < t.size(); ++j) s += t[j] * t[j];
  return s;
}

bool wedge_membership(const Eigen::VectorXd& x, const std::vector<double>& l, double eps) {
  if (!(eps > 0.0)) fail(ErrorCode::ConfigError, "eps must be positive");
  if (x.stableNorm() == 0.0) return false;
  return wedge_defect(x, l) < eps * eps;
}

OutSectionPoint local_map(const InSectionPoint& p, const EquilibriumSpec& eq) {
  if (p.x.size() != eq.u() || p.y.size() != eq.s())
    fail(ErrorCode::ConfigError, "section point dimensions do not match '" + eq.label + "'");
  if (std::abs(p.y.norm() - 1.0) > 1e-9)
    fail(ErrorCode::ConfigError, "incoming y must be a unit vector");
  const double T = time_of_flight(p.x, eq.lambda_expanding);
  OutSectionPoint out;
  out.node = p.node;
  out.phi = Eigen::VectorXd(eq.u());
  for (int j = 0; j < eq.u(); ++j)
    out.phi[j] = p.x[j] == 0.0 ? 0.0 : std::exp(eq.lambda_expanding[j] * T) * p.x[j];
  out.y = Eigen::VectorXd(eq.s());
  for (int j = 0; j < eq.s(); ++j)
    out.y[j] = std::exp(-eq.lambda_contracting[j] * T) * p.y[j];
  return out;
}

TransitionMap::TransitionMap(Eigen::MatrixXd M, Eigen::MatrixXd G)
    : M_(std::move(M)), G_(std::move(G)) {
  u_src_ = static_cast<int>(G_.cols());
  s_src_ = static_cast<int>(M_.cols());
  if (M_.rows() < 1 || M_.cols() < 1 || G_.rows() < 1 || G_.cols() < 1)
    fail(ErrorCode::ConfigError, "transition matrices must be nonempty");
}

TransitionMap TransitionMap::defaults(int u_src, int s_src, int u_next, int s_next) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(u_next, s_src);
  for (int i = 0; i < std::min(u_next, s_src); ++i) M(i, i) = 1.0;
  if (s_src > 1) M(0, s_src - 1) = 0.5;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s_next, u_src);
  for (int i = 0; i < std::min(s_next, u_src); ++i) G(i, i) = 1.0;
  return TransitionMap(std::move(M), std::move(G));
}

Eigen::MatrixXd TransitionMap::M(const Eigen::VectorXd& phi) const {
  if (phi.size() != u_src_) fail(ErrorCode::ConfigError, "phi dimension mismatch in M");
  return M_fn_ ? M_fn_(phi) : M_;
}

Eigen::VectorXd TransitionMap::gamma(const Eigen::VectorXd& phi) const {
  if (phi.size() != u_src_) fail(ErrorCode::ConfigError, "phi dimension mismatch in gamma");
  Eigen::VectorXd g = G_ * phi;
  double n = g.norm();
  if (n < kGenericTol)
    fail(ErrorCode::DegenerateGlobalMap, "gamma undefined: G phi vanishes");
  return g / n;
}

double TransitionMap::zeta() const {
  if (!M_fn_) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M_);
    return svd.singularValues()[0];
  }
  Philox rng(0x5eed0002u, 0);
  double sup = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd g = rng.gaussian_vector(u_src_);
    double n = g.norm();
    if (n < 1e-12) continue;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M_fn_(g / n));
    sup = std::max(sup, svd.singularValues()[0]);
  }
  return sup * 1.1;
}

double TransitionMap::chi() const {
  if (u_src_ == 1) return 0.0;  // S^0: no tangent directions
  Philox rng(0x5eed0003u, 0);
  const double h = 1e-5;
  double sup = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd g = rng.gaussian_vector(u_src_);
    if (g.norm() < 1e-12) continue;
    Eigen::VectorXd phi = g / g.norm();
    Eigen::VectorXd t = rng.gaussian_vector(u_src_);
    t -= t.dot(phi) * phi;
    double tn = t.norm();
    if (tn < 1e-12) continue;
    t /= tn;
    Eigen::VectorXd fwd = gamma((phi + h * t).normalized());
    Eigen::VectorXd bwd = gamma((phi - h * t).normalized());
    sup = std::max(sup, (fwd - bwd).norm() / (2.0 * h));
  }
  return sup * 1.1;
}

void TransitionMap::check_generic() const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(u_src_);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s_src_);
  for (double sign : {+1.0, -1.0}) {
    e[0] = sign;
    b[s_src_ - 1] = sign;
    Eigen::VectorXd image = M(e) * b;
    if (std::abs(image[0]) < kGenericTol) {
      std::ostringstream os;
      os << "first component of M(e_" << (sign > 0 ? "plus" : "minus") << ") b vanishes";
      fail(ErrorCode::DegenerateGlobalMap, os.str());
    }
  }
}

void TransitionMap::set_M_map(std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> fn) {
  M_fn_ = std::move(fn);
}

SectionMaps::SectionMaps(NetworkSpec net, std::vector<std::optional<TransitionMap>> edge_maps)
    : net_(std::move(net)) {
  sequence_ = principal_sequence(net_);
  const int n = cycle_length();
  if (!edge_maps.empty() && static_cast<int>(edge_maps.size()) != n)
    fail(ErrorCode::ConfigError, "edge map count does not match the principal cycle length");
  maps_.reserve(n);
  constants_.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& src = net_.at(sequence_[i]);
    const auto& dst = net_.at(sequence_[(i + 1) % n]);
    constants_.push_back(derive_constants(src));
    if (!edge_maps.empty() && edge_maps[i].has_value()) {
      const auto& m = *edge_maps[i];
      if (m.u_src() != src.u() || m.s_src() != src.s() || m.u_next() != dst.u() ||
          m.s_next() != dst.s())
        fail(ErrorCode::ConfigError,
             "transition map dimensions do not fit edge " + src.label + " -> " + dst.label);
      maps_.push_back(m);
    } else {
      maps_.push_back(TransitionMap::defaults(src.u(), src.s(), dst.u(), dst.s()));
    }
  }
  landmarks_in_.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& src = net_.at(sequence_[i]);
    SectionLandmarks lm;
    lm.e_plus = Eigen::VectorXd::Zero(src.u());
    lm.e_plus[0] = 1.0;
    lm.e_minus = -lm.e_plus;
    lm.b_plus = Eigen::VectorXd::Zero(src.s());
    lm.b_plus[src.s() - 1] = 1.0;
    lm.b_minus = -lm.b_plus;
    lm.y_plus = maps_[i].gamma(lm.e_plus);
    lm.y_minus = maps_[i].gamma(lm.e_minus);
    landmarks_in_[(i + 1) % n] = std::move(lm);
  }
}

int SectionMaps::node_index(const std::string& label) const {
  for (int i = 0; i < cycle_length(); ++i)
    if (sequence_[i] == label) return i;
  fail(ErrorCode::ConfigError, "'" + label + "' is not on the principal cycle");
}

InSectionPoint SectionMaps::transition_map(const InSectionPoint& p) const {
  const int i = node_index(p.node);
  const auto& eq = net_.at(p.node);
  const auto& edge = maps_[i];
  edge.check_generic();
  OutSectionPoint mid = local_map(p, eq);
  InSectionPoint out;
  out.node = sequence_[(i + 1) % cycle_length()];
  out.x = edge.M(mid.phi) * mid.y;
  out.y = edge.gamma(mid.phi);
  return out;
}

InSectionPoint SectionMaps::return_map(const InSectionPoint& p) const {
  InSectionPoint cur = p;
  for (int leg = 0; leg < cycle_length(); ++leg) {
    try {
      cur = transition_map(cur);
    } catch (Error& e) {
      e.leg = leg;
      throw;
    }
  }
  return cur;
}

bool SectionMaps::wedge_membership(const InSectionPoint& p, double eps) const {
  const auto& eq = net_.at(p.node);
  return hetnet::wedge_membership(p.x, eq.lambda_expanding, eps);
}

double SectionMaps::wedge_defect(const InSectionPoint& p) const {
  const auto& eq = net_.at(p.node);
  return hetnet::wedge_defect(p.x, eq.lambda_expanding);
}

bool SectionMaps::region_membership(const InSectionPoint& p, double delta, Region region) const {
  if (!(delta > 0.0)) fail(ErrorCode::ConfigError, "delta must be positive");
  const int i = node_index(p.node);
  const bool in_E = p.x.norm() < delta;
  if (region == Region::E) return in_E;
  const auto& lm = landmarks_in_[i];
  const bool in_F =
      std::min((p.y - lm.y_plus).norm(), (p.y - lm.y_minus).norm()) < delta;
  if (region == Region::F) return in_F;
  return in_E && in_F;
}

double SectionMaps::rho_loop() const {
  double r = 1.0;
  for (const auto& c : constants_) r *= c.rho;
  return r;
}

double SectionMaps::zeta_loop() const {
  // Composition of per-leg bounds x -> zeta_i x^(rho_i) around the cycle:
  // constants later in the loop enter with the product of the remaining rho.
  double acc = 1.0;
  for (int i = 0; i < cycle_length(); ++i) {
    double expo = 1.0;
    for (int j = i + 1; j < cycle_length(); ++j) expo *= constants_[j].rho;
    acc *= std::pow(maps_[i].zeta(), expo);
  }
  return acc;
}

}  // namespace hetnet
