// Independent reference computations for the test suite. Everything here is
// restricted to <cmath> and Eigen so results never route through the library
// code they are meant to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace oracle {

// Flight time for two expanding rates (2*l2, l2). Substituting s = exp(2*l2*T)
// turns the exit equation x1^2 s^2 + x2^2 s = 1 into a quadratic; the
// rationalized root stays accurate when x1 is tiny.
inline double quad_flight_T(double x1, double x2, double l2) {
  const double a = x1 * x1, b = x2 * x2;
  if (a == 0.0 && b == 0.0) throw std::invalid_argument("x = 0");
  double s;
  if (a == 0.0)
    s = 1.0 / b;
  else
    s = 2.0 / (b + std::sqrt(b * b + 4.0 * a));
  return std::log(s) / (2.0 * l2);
}

// Wedge defect 1 - tau_1^2 for a two-direction node with rate ratio
// alpha = l1/l2, solved by bisection in w = exp(2*l2*T). The defect depends
// on the direction ratio alpha only, not on the overall rate scale.
inline double defect_bisect(double x1, double x2, double alpha) {
  const double a = x1 * x1, b = x2 * x2;
  const double n2 = a + b;
  if (!(n2 > 0.0) || n2 >= 1.0) throw std::invalid_argument("need 0 < ||x|| < 1");
  auto f = [&](double w) { return a * std::pow(w, alpha) + b * w - 1.0; };
  double lo = 1.0, hi = 1.0 / n2;
  if (f(hi) < 0.0) {  // alpha < 1 would break this; callers use alpha > 1
    while (f(hi) < 0.0) hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double w = 0.5 * (lo + hi);
  return 1.0 - a * std::pow(w, alpha);
}

// Relative Lebesgue measure of the wedge complement inside the radius-delta
// disk, for a two-direction node with rate ratio alpha. Polar quadrature:
// for each radius the slice {theta : defect >= eps^2} is an arc whose edge is
// located by bisection (the defect grows from 0 to 1 as mass moves off the
// strong direction), then Simpson's rule integrates the arc length over r.
inline double complement_ratio_quadrature(double alpha, double eps, double delta,
                                          int n_radii = 2000) {
  const double eps2 = eps * eps;
  if (n_radii % 2 != 0) ++n_radii;  // Simpson needs an even interval count
  auto arc = [&](double r) {
    if (r <= 0.0) return 0.0;
    auto defect_at = [&](double theta) {
      double x1 = r * std::cos(theta), x2 = r * std::sin(theta);
      if (x1 == 0.0) return 1.0;
      return defect_bisect(x1, x2, alpha);
    };
    const double half_pi = 1.5707963267948966;
    if (defect_at(half_pi * (1.0 - 1e-15)) < eps2) return 0.0;
    double lo = 0.0, hi = half_pi;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (defect_at(mid) < eps2 ? lo : hi) = mid;
    }
    // complement arc over the full circle, by four-quadrant symmetry
    return 4.0 * (half_pi - 0.5 * (lo + hi));
  };
  double acc = 0.0;
  const double h = delta / n_radii;
  for (int k = 0; k <= n_radii; ++k) {
    double r = k * h;
    double wgt = (k == 0 || k == n_radii) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += wgt * arc(r) * r;
  }
  double numerator = acc * h / 3.0;
  double denominator = M_PI * delta * delta;
  return numerator / denominator;
}

// Classic fixed-step RK4 for the decoupled linear local model
// xdot_j = le_j x_j, ydot_j = -lc_j y_j, integrated to time T.
inline void rk4_linear_flow(const std::vector<double>& le, const std::vector<double>& lc,
                            Eigen::VectorXd& x, Eigen::VectorXd& y, double T, int steps) {
  auto deriv = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                   Eigen::VectorXd& dx, Eigen::VectorXd& dy) {
    for (int j = 0; j < xs.size(); ++j) dx[j] = le[j] * xs[j];
    for (int j = 0; j < ys.size(); ++j) dy[j] = -lc[j] * ys[j];
  };
  const double h = T / steps;
  Eigen::VectorXd k1x(x.size()), k1y(y.size()), k2x(x.size()), k2y(y.size()),
      k3x(x.size()), k3y(y.size()), k4x(x.size()), k4y(y.size());
  for (int s = 0; s < steps; ++s) {
    deriv(x, y, k1x, k1y);
    deriv(x + 0.5 * h * k1x, y + 0.5 * h * k1y, k2x, k2y);
    deriv(x + 0.5 * h * k2x, y + 0.5 * h * k2y, k3x, k3y);
    deriv(x + h * k3x, y + h * k3y, k4x, k4y);
    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  }
}

// Tiny deterministic generator for test-local sampling, independent of the
// library's RNG (xorshift-style mix over a counter).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double unit_real(std::uint64_t seed, std::uint64_t k) {
  return (mix64(seed * 0x100000001b3ULL + k) >> 11) * 0x1.0p-53;
}

}  // namespace oracle
