#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

namespace hetnet {

// Dormand-Prince 5(4) embedded pair with PI step-size control (FSAL).
// Deterministic: no time-of-day, no global state.
struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.5;
  double initial_step = 0.0;  // 0: heuristic
  // Called after every accepted step (and once at t0); return false to halt.
  std::function<bool(double t, const Eigen::VectorXd& y)> observer;
  // Applied to the state after each accepted step (clamping hook).
  std::function<void(Eigen::VectorXd& y)> project;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
};

enum class OdeStatus { Completed, Halted, StepUnderflow };

struct OdeResult {
  OdeStatus status = OdeStatus::Completed;
  double time_reached = 0.0;
  Eigen::VectorXd state;
  OdeStats stats;
};

template <typename Rhs>
OdeResult integrate_ode(const Rhs& rhs, Eigen::VectorXd y, double t0, double t1,
                        const OdeOptions& opt) {
  static const double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static const double kA[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  // b (5th order) equals the last A row; e = b - bhat (error weights).
  static const double kE[7] = {71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                               -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

  OdeResult res;
  res.state = y;
  res.time_reached = t0;

  const int n = static_cast<int>(y.size());
  Eigen::VectorXd k[7];
  for (auto& v : k) v.resize(n);
  Eigen::VectorXd ytmp(n), ynew(n), yerr(n);

  double t = t0;
  k[0] = rhs(t, y);

  double h = opt.initial_step;
  if (h <= 0.0) {
    double scale = opt.abs_tol + opt.rel_tol * y.norm();
    double d = k[0].norm();
    h = d > 0.0 ? 0.01 * std::pow(scale / d, 0.2) : 1e-4;
    h = std::min(h, opt.max_step);
  }
  h = std::min(h, t1 - t0);

  if (opt.observer && !opt.observer(t, y)) {
    res.status = OdeStatus::Halted;
    return res;
  }

  double err_old = 1e-4;
  bool just_rejected = false;
  while (t < t1) {
    const double h_floor = 1e-14 * std::max(1.0, std::abs(t));
    if (h < h_floor) {
      res.status = OdeStatus::StepUnderflow;
      res.time_reached = t;
      res.state = y;
      return res;
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }

    for (int stage = 1; stage < 7; ++stage) {
      ytmp = y;
      for (int j = 0; j < stage; ++j)
        if (kA[stage][j] != 0.0) ytmp += (h * kA[stage][j]) * k[j];
      k[stage] = rhs(t + kC[stage] * h, ytmp);
    }
    ynew = y;
    for (int j = 0; j < 6; ++j)
      if (kA[6][j] != 0.0) ynew += (h * kA[6][j]) * k[j];

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double e = 0.0;
      for (int j = 0; j < 7; ++j) e += kE[j] * k[j][i];
      e *= h;
      double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      double q = e / sc;
      err += q * q;
    }
    err = std::sqrt(err / n);

    if (err <= 1.0) {
      t += h;
      y = ynew;
      if (opt.project) opt.project(y);
      // FSAL: stage 7 evaluated at (t, ynew) seeds the next step. Re-evaluate
      // after projection so clamped coordinates stay consistent.
      k[0] = opt.project ? rhs(t, y) : k[6];
      ++res.stats.accepted;
      res.stats.min_step = std::min(res.stats.min_step, h);
      res.stats.max_step = std::max(res.stats.max_step, h);
      if (opt.observer && !opt.observer(t, y)) {
        res.status = OdeStatus::Halted;
        res.time_reached = t;
        res.state = y;
        return res;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) * std::pow(err_old, 0.04);
      fac = std::min(just_rejected ? 1.0 : 5.0, std::max(0.2, fac));
      err_old = std::max(err, 1e-10);
      just_rejected = false;
      if (!last) h = std::min(h * fac, opt.max_step);
    } else {
      ++res.stats.rejected;
      double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
      just_rejected = true;
    }
  }
  res.time_reached = t;
  res.state = y;
  return res;
}

}  // namespace hetnet
