#include "hetnet/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "hetnet/errors.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

namespace {

void check_expanding(const std::vector<double>& le) {
  if (le.empty()) fail(ErrorCode::ConfigError, "empty expanding eigenvalue list");
  for (size_t i = 0; i < le.size(); ++i) {
    if (!(le[i] > 0.0)) fail(ErrorCode::ConfigError, "expanding eigenvalues must be positive");
    if (i > 0 && !(le[i] < le[i - 1]))
      fail(ErrorCode::ConfigError, "expanding eigenvalues must be strictly descending");
  }
}

double unit_ball_volume(int u) {
  return std::pow(M_PI, 0.5 * u) / std::tgamma(0.5 * u + 1.0);
}

}  // namespace

MeasureEstimate estimate_wedge_complement_ratio(const EquilibriumSpec& eq, double eps,
                                                double delta, long long n_samples,
                                                std::uint64_t seed, int workers) {
  check_expanding(eq.lambda_expanding);
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::ConfigError, "eps must lie in (0,1)");
  if (!(delta > 0.0)) fail(ErrorCode::ConfigError, "delta must be positive");
  if (delta >= 1.0) fail(ErrorCode::OutsideChart, "delta must stay below the chart radius 1");
  if (n_samples <= 0) fail(ErrorCode::ConfigError, "n_samples must be positive");

  MeasureEstimate est;
  est.node = eq.label;
  est.eps = eps;
  est.delta = delta;
  est.n_samples = n_samples;
  est.seed = seed;

  const int u = static_cast<int>(eq.lambda_expanding.size());
  if (u == 1) {
    est.ratio = 0.0;
    est.half_width = 0.0;
    est.hits = 0;
    est.note = "single expanding direction: the wedge complement is empty";
    return est;
  }

  const double alpha = eq.lambda_expanding[0] / eq.lambda_expanding[1];
  est.analytic_bound = std::pow(eps, -2.0 * alpha) * std::pow(delta, alpha - 1.0);
  est.bound_corrected = std::exp2(static_cast<double>(u)) / unit_ball_volume(u) *
                        std::pow(eps, -alpha) * std::pow(delta, alpha - 1.0);

  const double eps2 = eps * eps;
  const auto& le = eq.lambda_expanding;
  auto count_range = [&](long long lo, long long hi) -> long long {
    long long hits = 0;
    for (long long i = lo; i < hi; ++i) {
      Philox rng(seed, static_cast<std::uint64_t>(i));
      Eigen::VectorXd x = rng.ball_point(u, delta);
      if (!(wedge_defect(x, le) < eps2)) ++hits;
    }
    return hits;
  };

  long long hits = 0;
  const int nw = std::max(1, workers);
  if (nw == 1) {
    hits = count_range(0, n_samples);
  } else {
    std::vector<long long> partial(nw, 0);
    std::vector<std::thread> pool;
    long long chunk = (n_samples + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
      long long lo = w * chunk, hi = std::min<long long>(n_samples, lo + chunk);
      if (lo < hi)
        pool.emplace_back([&partial, w, lo, hi, &count_range] { partial[w] = count_range(lo, hi); });
    }
    for (auto& t : pool) t.join();
    for (long long p : partial) hits += p;
  }

  est.hits = hits;
  est.ratio = static_cast<double>(hits) / static_cast<double>(n_samples);
  const double n = static_cast<double>(n_samples);
  est.half_width =
      1.959963984540054 * std::sqrt(est.ratio * (1.0 - est.ratio) / n) + 0.5 / n;
  est.wide_ci = est.half_width > 0.5 * est.ratio || hits < 100;
  if (hits < 100) est.note = "fewer than 100 complement hits";
  return est;
}

ScalingStudy delta_scaling_study(const EquilibriumSpec& eq, double eps,
                                 const std::vector<double>& deltas, long long n_samples,
                                 std::uint64_t seed, int workers) {
  check_expanding(eq.lambda_expanding);
  if (deltas.size() < 4) fail(ErrorCode::ConfigError, "need at least 4 delta values");
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] < 1.0))
      fail(ErrorCode::ConfigError, "delta values must lie in (0,1)");
    if (i > 0 && !(deltas[i] < deltas[i - 1]))
      fail(ErrorCode::ConfigError, "delta values must be strictly decreasing");
  }

  ScalingStudy study;
  study.node = eq.label;
  study.eps = eps;
  const int u = static_cast<int>(eq.lambda_expanding.size());
  if (u >= 2)
    study.expected_slope = eq.lambda_expanding[0] / eq.lambda_expanding[1] - 1.0;

  for (size_t i = 0; i < deltas.size(); ++i)
    study.cells.push_back(estimate_wedge_complement_ratio(
        eq, eps, deltas[i], n_samples, split_seed(seed, static_cast<std::uint64_t>(i)),
        workers));

  if (u == 1) {
    study.vacuous = true;
    study.note = "single expanding direction: all ratios are exactly 0";
    return study;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const auto& c : study.cells) {
    if (c.wide_ci || c.hits <= 0) continue;
    double lx = std::log(c.delta), ly = std::log(c.ratio);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  study.used_cells = m;
  if (m >= 2) {
    double denom = m * sxx - sx * sx;
    if (denom != 0.0) study.slope = (m * sxy - sx * sy) / denom;
  }
  if (m < 2) study.note = "fewer than two cells with usable confidence intervals";
  return study;
}

OmegaOrbit iterate_return_map(const SectionMaps& maps, const InSectionPoint& start,
                              int n_loops) {
  if (n_loops < 0) fail(ErrorCode::ConfigError, "n_loops must be nonnegative");
  if (start.node != maps.sequence().front())
    fail(ErrorCode::ConfigError, "orbit must start on the first principal in-section");

  OmegaOrbit orbit;
  orbit.rho_loop = maps.rho_loop();
  orbit.zeta_loop = maps.zeta_loop();
  for (int i = 0; i < maps.cycle_length(); ++i) {
    const DerivedConstants& c = maps.constants(i);
    double beta = c.beta;
    orbit.defect_exponent_single.push_back(2.0 * c.rho * (1.0 - beta));
    orbit.defect_exponent_composed.push_back(c.rho);
  }

  const SectionLandmarks& lm = maps.landmarks_into(0);
  auto dist_landmark = [&lm](const Eigen::VectorXd& y) {
    return std::min((y - lm.y_plus).norm(), (y - lm.y_minus).norm());
  };
  auto push = [&](const InSectionPoint& p, bool on_connection) {
    orbit.points.push_back(p);
    orbit.x_norms.push_back(p.x.stableNorm());
    orbit.wedge_defects.push_back(on_connection ? 0.0 : maps.wedge_defect(p));
    orbit.dist_to_y_plus.push_back(dist_landmark(p.y));
  };

  if (start.x.stableNorm() == 0.0) {
    push(start, true);
    orbit.status = OrbitStatus::AlreadyConverged;
    return orbit;
  }

  push(start, false);
  InSectionPoint p = start;
  for (int loop = 1; loop <= n_loops; ++loop) {
    try {
      p = maps.return_map(p);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::OutsideChart) {
        orbit.status = OrbitStatus::Escaped;
        orbit.escape_loop = loop;
        orbit.note = e.what();
        return orbit;
      }
      if (e.code() == ErrorCode::OnStableManifold) {
        // The orbit collapsed numerically onto the connection mid-circuit.
        orbit.note = "orbit reached the connection exactly at loop " + std::to_string(loop);
        orbit.status = OrbitStatus::Completed;
        return orbit;
      }
      throw;
    }
    bool collapsed = p.x.stableNorm() == 0.0;
    push(p, collapsed);
    if (collapsed) {
      orbit.note = "x underflowed to 0 at loop " + std::to_string(loop);
      break;
    }
  }
  orbit.status = OrbitStatus::Completed;
  return orbit;
}

namespace {

struct LemmaSample {
  std::vector<double> lambdas;
  Eigen::VectorXd x;
  bool axis = false;  // x1 = 0 draw
};

LemmaSample draw_lemma_sample(std::uint64_t seed, long long index, const LemmaRanges& rg) {
  Philox rng(seed, static_cast<std::uint64_t>(index));
  LemmaSample s;
  int span = rg.u_max - rg.u_min + 1;
  int u = rg.u_min + static_cast<int>(rng.next_u32() % static_cast<std::uint32_t>(span));

  // Distinct ordered eigenvalues; redraw on near-collision.
  for (int attempt = 0; attempt < 100; ++attempt) {
    s.lambdas.clear();
    for (int j = 0; j < u; ++j) s.lambdas.push_back(rng.uniform(rg.lambda_min, rg.lambda_max));
    std::sort(s.lambdas.begin(), s.lambdas.end(), std::greater<double>());
    bool ok = true;
    for (int j = 1; j < u; ++j)
      if (s.lambdas[j - 1] - s.lambdas[j] < 1e-3 * rg.lambda_max) ok = false;
    if (ok) break;
  }

  double r = std::exp(rng.uniform(std::log(rg.xnorm_min), std::log(rg.xnorm_max)));
  if (index % 100 == 50) {
    s.axis = true;
    Eigen::VectorXd w = rng.gaussian_vector(u - 1);
    w.normalize();
    s.x = Eigen::VectorXd::Zero(u);
    s.x.tail(u - 1) = r * w;
  } else if (index % 10 == 9) {
    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Eigen::VectorXd w = rng.gaussian_vector(u - 1);
    w.normalize();
    s.x = Eigen::VectorXd::Zero(u);
    s.x[0] = sign * 0.999 * r;
    s.x.tail(u - 1) = r * std::sqrt(1.0 - 0.999 * 0.999) * w;
  } else {
    Eigen::VectorXd w = rng.gaussian_vector(u);
    w.normalize();
    s.x = r * w;
  }
  return s;
}

}  // namespace

LemmaCheckReport check_lemma_inequalities(long long n_samples, std::uint64_t seed,
                                          const LemmaRanges& ranges) {
  if (n_samples <= 0) fail(ErrorCode::ConfigError, "n_samples must be positive");
  if (ranges.u_min < 2 || ranges.u_max < ranges.u_min)
    fail(ErrorCode::ConfigError, "lemma checks need u ranges with u_min >= 2");
  if (!(ranges.lambda_min > 0.0 && ranges.lambda_max > ranges.lambda_min))
    fail(ErrorCode::ConfigError, "lambda range must be positive and ordered");
  if (!(ranges.xnorm_min > 0.0 && ranges.xnorm_max < 1.0 &&
        ranges.xnorm_max > ranges.xnorm_min))
    fail(ErrorCode::ConfigError, "x norm range must lie inside (0,1)");

  LemmaCheckReport rep;
  rep.n_samples = n_samples;
  auto witness = [&rep](const char* what, const LemmaSample& s, double lhs, double rhs) {
    if (rep.witnesses.size() >= 3) return;
    std::ostringstream os;
    os << what << ": lhs=" << lhs << " rhs=" << rhs << " lambdas=(";
    for (size_t j = 0; j < s.lambdas.size(); ++j)
      os << (j ? "," : "") << s.lambdas[j];
    os << ") x=(";
    for (int j = 0; j < s.x.size(); ++j) os << (j ? "," : "") << s.x[j];
    os << ")";
    rep.witnesses.push_back(os.str());
  };

  for (long long i = 0; i < n_samples; ++i) {
    LemmaSample s = draw_lemma_sample(seed, i, ranges);
    const double l1 = s.lambdas.front(), lu = s.lambdas.back();
    const double r = s.x.norm();
    double T = time_of_flight(s.x, s.lambdas);
    ++rep.checked;

    // Comparison slacks: kTimeTol covers the flight-solver residual (1e-12 on
    // the sphere equation, so ~3e-12 on T); kRelTol covers rounding in the
    // inequality sides themselves.  The analytic margins shrink to zero as
    // the mass concentrates on one coordinate, so the endpoints are attained
    // in the limit and a strict float comparison would flip on noise.
    constexpr double kTimeTol = 1e-10;
    constexpr double kRelTol = 1e-9;

    double lo = -std::log(r) / l1, hi = -std::log(r) / lu;
    if (!(lo * (1.0 - kTimeTol) <= T && T <= hi * (1.0 + kTimeTol))) {
      ++rep.violations_bracket;
      witness("flight bracket", s, T, lo);
    }

    double x1 = std::abs(s.x[0]);
    // exp(T) <= |x1|^(-1/l1); vacuous when x1 = 0.
    if (x1 > 0.0 && !(T <= (-std::log(x1) / l1) * (1.0 + kTimeTol))) {
      ++rep.violations_exit_bound;
      witness("exit bound", s, T, -std::log(x1) / l1);
    }

    if (s.axis || x1 == 0.0) {
      ++rep.skipped_axis;
      continue;
    }

    double beta = s.lambdas[1] / l1;
    double rest = s.x.tail(s.x.size() - 1).squaredNorm();
    double defect = wedge_defect(s.x, s.lambdas);
    if (!(defect <= std::pow(x1, -2.0 * beta) * rest * (1.0 + kRelTol))) {
      ++rep.violations_defect_bound;
      witness("defect bound", s, defect, std::pow(x1, -2.0 * beta) * rest);
    }
    if (rest > 0.0) {
      double k = 0.5 * x1 * x1 / rest;  // the cone condition then holds with margin 2
      double bound = std::pow(k, -beta) * std::pow(r, 2.0 - 2.0 * beta);
      if (!(defect < bound)) {
        ++rep.violations_cone_bound;
        witness("cone bound", s, defect, bound);
      }
    }
  }

  rep.passed = rep.violations_bracket == 0 && rep.violations_defect_bound == 0 &&
               rep.violations_cone_bound == 0 && rep.violations_exit_bound == 0;
  return rep;
}

const char* check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Warn: return "WARN";
    case CheckStatus::Missing: return "MISSING";
  }
  return "?";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::PredominantlyStableEvidence: return "PREDOMINANTLY_STABLE_EVIDENCE";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    case Verdict::Counterevidence: return "COUNTEREVIDENCE";
  }
  return "?";
}

StabilityVerdict stability_verdict(const std::vector<CheckResult>& checks) {
  StabilityVerdict v;
  v.supporting = checks;

  std::vector<std::string> failed, warned, missing;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) failed.push_back(c.name);
    if (c.status == CheckStatus::Warn) warned.push_back(c.name);
    if (c.status == CheckStatus::Missing) missing.push_back(c.name);
  }
  static const char* kRequired[] = {"hypotheses", "measure", "contraction", "channel"};
  for (const char* kind : kRequired) {
    bool present = false;
    for (const auto& c : checks)
      if (c.kind == kind && c.status != CheckStatus::Missing) present = true;
    if (!present) missing.push_back(std::string(kind) + " (required)");
  }

  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ", ") + e;
    return s;
  };

  if (!failed.empty()) {
    v.verdict = Verdict::Counterevidence;
    v.rationale = "failed checks: " + join(failed);
  } else if (!warned.empty() || !missing.empty()) {
    v.verdict = Verdict::Inconclusive;
    v.rationale.clear();
    if (!warned.empty()) v.rationale += "warnings: " + join(warned);
    if (!missing.empty())
      v.rationale += (v.rationale.empty() ? "" : "; ") + ("missing: " + join(missing));
  } else {
    v.verdict = Verdict::PredominantlyStableEvidence;
    std::vector<std::string> names;
    for (const auto& c : checks) names.push_back(c.name);
    v.rationale = "all checks passed: " + join(names);
  }
  return v;
}

}  // namespace hetnet
