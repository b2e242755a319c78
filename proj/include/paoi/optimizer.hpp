#pragma once

// Optimal fixed threshold, minimum achievable average peak age, preemption
// benefit tests, and a Bellman value-iteration cross-check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "paoi/analytic.hpp"
#include "paoi/detail/parallel.hpp"
#include "paoi/distributions.hpp"
#include "paoi/errors.hpp"

namespace paoi {

struct ThresholdWindow {
  double theta_min;
  double theta_max;
};

inline constexpr std::size_t kDefaultGridPoints = 2000;
inline constexpr double kTieTolerance = 1e-9;

/// theta_min just above x_min and theta_max at the (1 - 1e-6) quantile. When
/// that quantile does not exceed theta_min (point masses) theta_max = 2 theta_min.
inline ThresholdWindow default_window(const ServiceDistribution& d) {
  const double lo = support_min(d) * (1.0 + 1e-6) + 1e-9;
  double hi = quantile(d, 1.0 - 1e-6);
  if (!(hi > lo)) hi = 2.0 * lo;
  return {lo, hi};
}

inline void validate_window(const ServiceDistribution& d, const ThresholdWindow& w) {
  if (!std::isfinite(w.theta_min) || !std::isfinite(w.theta_max)) {
    throw InvalidWindow("threshold window must be finite");
  }
  if (w.theta_min < support_min(d)) {
    throw InvalidWindow("theta_min lies below the support minimum " +
                        std::to_string(support_min(d)));
  }
  if (!(w.theta_min < w.theta_max)) throw InvalidWindow("theta_min must be below theta_max");
}

/// Endpoints included exactly; log spacing when theta_max / theta_min > 100.
inline std::vector<double> threshold_grid(const ThresholdWindow& w, std::size_t points) {
  if (points < 2) throw std::invalid_argument("threshold grid needs at least two points");
  std::vector<double> grid(points);
  const bool log_spaced = w.theta_min > 0.0 && w.theta_max / w.theta_min > 100.0;
  const double a = log_spaced ? std::log(w.theta_min) : w.theta_min;
  const double b = log_spaced ? std::log(w.theta_max) : w.theta_max;
  for (std::size_t i = 0; i < points; ++i) {
    const double s = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = log_spaced ? std::exp(s) : s;
  }
  grid.front() = w.theta_min;
  grid.back() = w.theta_max;
  return grid;
}

struct ThresholdSearch {
  double theta;
  ExtendedReal zeta;
  double grid_theta;        // best grid point before refinement
  ExtendedReal grid_zeta;
  std::size_t evaluations = 0;
  std::size_t refinement_depth = 0;
};

/// Global minimizer of zeta(theta) over the window: dense grid, then
/// golden-section refinement inside the best grid cell. No unimodality is
/// assumed. Ties resolve to the smallest theta; refinement only replaces the
/// grid point on strict improvement.
inline ThresholdSearch optimal_threshold(const ServiceDistribution& d, const ThresholdWindow& w,
                                         double tol = -1.0,
                                         std::size_t grid_points = kDefaultGridPoints) {
  validate_window(d, w);
  if (tol < 0.0) tol = 1e-8 * (w.theta_max - w.theta_min);
  if (!(tol > 0.0)) throw InvalidWindow("refinement tolerance must be positive");

  const std::vector<double> grid = threshold_grid(w, grid_points);
  std::vector<double> zeta(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t i) {
    zeta[i] = paoi_fixed_threshold(d, grid[i]).zeta.value();
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (zeta[i] < zeta[best]) best = i;
  }
  ThresholdSearch out{grid[best], zeta[best], grid[best], zeta[best], grid.size(), 0};
  if (std::isinf(zeta[best])) return out;

  auto eval = [&](double t) {
    ++out.evaluations;
    const double z = paoi_fixed_threshold(d, t).zeta.value();
    if (z < out.zeta.value()) {
      out.zeta = z;
      out.theta = t;
    }
    return z;
  };

  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  constexpr double kInvPhi = 0.6180339887498948482;
  double c = b - kInvPhi * (b - a);
  double e = a + kInvPhi * (b - a);
  double fc = eval(c);
  double fe = eval(e);
  while (b - a > tol) {
    ++out.refinement_depth;
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kInvPhi * (b - a);
      fe = eval(e);
    }
    if (out.refinement_depth > 10'000) break;
  }
  eval(a);
  eval(b);
  return out;
}

enum class Winner { FixedThreshold, XMinThreshold, ZeroWait };

inline std::string to_string(Winner w) {
  switch (w) {
    case Winner::FixedThreshold: return "fixed-threshold";
    case Winner::XMinThreshold: return "xmin";
    case Winner::ZeroWait: return "zero-wait";
  }
  return "unknown";
}

struct OptimizationResult {
  double theta_dagger;
  ExtendedReal zeta_at_theta_dagger;
  ExtendedReal zeta_star;
  Winner winner;
  ThresholdWindow search_window;
  ExtendedReal zeta_zero_wait;
  ExtendedReal zeta_xmin;
  std::size_t evaluations = 0;
  std::size_t refinement_depth = 0;
  std::string xmin_diagnostic;
};

/// zeta* = min(zeta(theta_dagger), 2 E[X], zeta(x_min)).
///
/// Within a relative tie of 1e-9 the winner is chosen in the order
/// fixed-threshold, x_min, zero-wait, except that theta_dagger = x_min
/// counts as the x_min policy. An infinite 2 E[X] never wins.
inline OptimizationResult min_achievable_paoi(const ServiceDistribution& d,
                                              const ThresholdWindow& w, double tol = -1.0,
                                              std::size_t grid_points = kDefaultGridPoints) {
  const ThresholdSearch search = optimal_threshold(d, w, tol, grid_points);
  const PaoiValue xmin = paoi_xmin_value(d);
  const ExtendedReal zero_wait = paoi_zero_wait(d);

  OptimizationResult r{search.theta,  search.zeta,    search.zeta,
                       Winner::FixedThreshold, w,     zero_wait,
                       xmin.zeta,     search.evaluations, search.refinement_depth,
                       xmin.diagnostic};
  ExtendedReal winning = search.zeta;
  auto challenge = [&](ExtendedReal value, Winner who) {
    if (value < winning && relative_difference(value, winning) > kTieTolerance) {
      winning = value;
      r.winner = who;
    }
  };
  // A fixed threshold sitting on x_min is the x_min policy itself.
  if (search.theta <= support_min(d) && xmin.zeta.is_finite()) {
    winning = xmin.zeta;
    r.winner = Winner::XMinThreshold;
  }
  challenge(xmin.zeta, Winner::XMinThreshold);
  if (zero_wait.is_finite()) challenge(zero_wait, Winner::ZeroWait);
  r.zeta_star = min(search.zeta, min(xmin.zeta, zero_wait));
  return r;
}

/// One sweep T(U) = min_theta { c'(theta) + U P(X > theta) } over a fixed grid,
/// with per-cycle cost c'(theta) = 2 E[X 1{X <= theta}] + theta P(X > theta).
class BellmanOperator {
public:
  BellmanOperator(const ServiceDistribution& d, std::vector<double> grid)
      : grid_(std::move(grid)), cost_(grid_.size()), survival_(grid_.size()) {
    detail::parallel_for(grid_.size(), [&](std::size_t i) {
      const double t = grid_[i];
      survival_[i] = survival(d, t);
      cost_[i] = 2.0 * truncated_first_moment(d, t) + t * survival_[i];
    });
  }

  double operator()(double u) const { return apply(u).first; }

  /// (T(U), grid index of the minimizer).
  std::pair<double, std::size_t> apply(double u) const {
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double v = cost_[i] + u * survival_[i];
      if (v < best) {
        best = v;
        arg = i;
      }
    }
    return {best, arg};
  }

  /// Lipschitz bound max_theta P(X > theta).
  double modulus() const { return *std::max_element(survival_.begin(), survival_.end()); }

  const std::vector<double>& grid() const { return grid_; }

private:
  std::vector<double> grid_;
  std::vector<double> cost_;
  std::vector<double> survival_;
};

struct BellmanResult {
  double fixed_point;
  double theta;  // minimizer at the fixed point
  std::size_t iterations;
  double modulus;
};

/// Value iteration from U = initial_value (0 by default) until
/// |U_{n+1} - U_n| < tol. The fixed point equals the grid minimum of
/// zeta(theta), since c'(theta) / F(theta) = zeta(theta).
///
/// Starting below the fixed point, each sweep gains at most
/// c'(theta_min) - U F(theta_min), so windows with F(theta_min) near 0 crawl;
/// starting from an upper bound such as zeta(theta_max) converges at rate
/// P(X > theta_dagger) instead.
inline BellmanResult bellman_fixed_point(const ServiceDistribution& d, const ThresholdWindow& w,
                                         double tol = 1e-12,
                                         std::size_t grid_points = kDefaultGridPoints,
                                         std::size_t max_iterations = 10'000'000,
                                         double initial_value = 0.0) {
  validate_window(d, w);
  if (!(tol > 0.0)) throw std::invalid_argument("bellman tolerance must be positive");
  const BellmanOperator op(d, threshold_grid(w, grid_points));
  const double modulus = op.modulus();
  if (!(modulus < 1.0)) {
    throw NoContraction("P(X > theta_min) = 1: the Bellman operator is not a contraction");
  }
  double u = initial_value;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const auto [next, arg] = op.apply(u);
    const double delta = std::abs(next - u);
    u = next;
    if (delta < tol) return {u, op.grid()[arg], it, modulus};
  }
  throw NoContraction("value iteration did not converge within the iteration cap");
}

enum class Condition { NecessarySufficient, SufficientHalfThreshold, ResidualExceedsMean };

inline std::string to_string(Condition c) {
  switch (c) {
    case Condition::NecessarySufficient: return "necessary-sufficient";
    case Condition::SufficientHalfThreshold: return "sufficient-residual-half-threshold";
    case Condition::ResidualExceedsMean: return "sufficient-residual-exceeds-mean";
  }
  return "unknown";
}

struct PreemptionVerdict {
  bool beneficial = false;
  std::optional<double> witness_theta;
  Condition condition_used = Condition::NecessarySufficient;
  double margin = 0.0;  // positive on the beneficial side; may be +inf
};

/// Preemptions help iff min(zeta(theta_dagger), zeta(x_min)) < 2 E[X]
/// (strict, relative tolerance 1e-9). Infinite mean is beneficial with margin +inf.
inline PreemptionVerdict preemption_beneficial(const ServiceDistribution& d,
                                               const ThresholdWindow& w,
                                               std::size_t grid_points = kDefaultGridPoints) {
  const ThresholdSearch search = optimal_threshold(d, w, -1.0, grid_points);
  const ExtendedReal xmin = paoi_xmin(d);
  const ExtendedReal zero_wait = paoi_zero_wait(d);

  PreemptionVerdict v;
  v.condition_used = Condition::NecessarySufficient;
  const bool xmin_better = xmin < search.zeta;
  const ExtendedReal best = xmin_better ? xmin : search.zeta;
  const double witness = xmin_better ? support_min(d) : search.theta;
  if (zero_wait.is_infinite()) {
    v.beneficial = true;
    v.margin = std::numeric_limits<double>::infinity();
    v.witness_theta = witness;
    return v;
  }
  const double target = zero_wait.value();
  v.margin = best.is_infinite() ? -std::numeric_limits<double>::infinity() : target - best.value();
  v.beneficial = best.is_finite() && best.value() < target * (1.0 - kTieTolerance);
  if (v.beneficial) v.witness_theta = witness;
  return v;
}

inline PreemptionVerdict preemption_beneficial(const ServiceDistribution& d) {
  return preemption_beneficial(d, default_window(d));
}

namespace detail {
template <class Slack>
PreemptionVerdict first_witness(const ServiceDistribution& d, const std::vector<double>& grid,
                                Condition condition, Slack&& slack) {
  PreemptionVerdict v;
  v.condition_used = condition;
  v.margin = -std::numeric_limits<double>::infinity();
  const ExtendedReal m = mean(d);
  if (m.is_infinite()) return v;  // inf < inf never holds
  for (double theta : grid) {
    if (theta < 0.0 || survival(d, theta) <= 0.0) continue;
    const ExtendedReal r = conditional_residual(d, theta);
    const double s = r.is_infinite() ? std::numeric_limits<double>::infinity()
                                     : slack(m.value(), r.value(), theta);
    if (s > kTieTolerance * m.value()) {
      v.beneficial = true;
      v.witness_theta = theta;
      v.margin = s;
      return v;
    }
    v.margin = std::max(v.margin, s);
  }
  return v;
}
}  // namespace detail

/// Sufficient condition: some theta on the grid with
/// E[X] < E[X - theta | X > theta] + theta / 2. Reports the first witness.
inline PreemptionVerdict half_threshold_sufficient(const ServiceDistribution& d,
                                           const std::vector<double>& grid) {
  return detail::first_witness(d, grid, Condition::SufficientHalfThreshold,
                               [](double m, double r, double t) { return r + 0.5 * t - m; });
}

/// Weaker corollary: some theta with E[X - theta | X > theta] > E[X] (mean
/// residual life above the mean). Implies the half-threshold condition.
inline PreemptionVerdict residual_exceeds_mean(const ServiceDistribution& d,
                                               const std::vector<double>& grid) {
  return detail::first_witness(d, grid, Condition::ResidualExceedsMean,
                               [](double m, double r, double) { return r - m; });
}

/// Critical t2 for the two-point law (t1 w.p. p, t2 otherwise): preemptions
/// help iff t2 exceeds it. From t1 (1 + p) / p < 2 (p t1 + (1 - p) t2).
inline double twopoint_benefit_threshold(double p, double t1) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  if (!(t1 > 0.0)) throw std::invalid_argument("t1 must be positive");
  return t1 * (1.0 / p + 1.0 - 2.0 * p) / (2.0 * (1.0 - p));
}

}  // namespace paoi
