#pragma once

// Average peak age of information for threshold request policies.
//
// Peaks decompose as A_{k+1} = Y_{k+1} + Xr_k, where Xr_k is the service
// time of the k-th received update and Y_{k+1} the time between the k-th and
// (k+1)-th receptions, so zeta = E[Xr] + E[Y].

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>

#include "paoi/distributions.hpp"
#include "paoi/errors.hpp"
#include "paoi/extended_real.hpp"
#include "paoi/policy.hpp"

namespace paoi {

struct PaoiValue {
  ExtendedReal zeta;
  ExtendedReal expected_received_service;  // E[Xr]
  ExtendedReal expected_interreception;    // E[Y]
  double truncation_bound = 0.0;           // series remainder, repetitive policies only
  std::size_t series_terms = 0;
  std::string diagnostic;
};

inline constexpr double kDefaultSeriesTolerance = 1e-10;

/// E[Xr] under a fixed threshold: E[X 1{X <= theta}] / F(theta); +inf when F(theta) = 0.
inline ExtendedReal expected_received_service(const ServiceDistribution& d, double theta) {
  const double f = cdf(d, theta);
  if (f <= 0.0) return ExtendedReal::infinity();
  return truncated_first_moment(d, theta) / f;
}

/// E[Y] under a fixed threshold: (theta - int_0^theta F) / F(theta); +inf when F(theta) = 0.
inline ExtendedReal expected_interreception(const ServiceDistribution& d, double theta) {
  const double f = cdf(d, theta);
  if (f <= 0.0) return ExtendedReal::infinity();
  return integrated_survival(d, theta) / f;
}

inline PaoiValue paoi_fixed_threshold(const ServiceDistribution& d, double theta) {
  PaoiValue v;
  v.expected_received_service = expected_received_service(d, theta);
  v.expected_interreception = expected_interreception(d, theta);
  v.zeta = v.expected_received_service + v.expected_interreception;
  if (v.zeta.is_infinite()) v.diagnostic = "F(theta) = 0: no update is ever received";
  return v;
}

/// 2 E[X]; the received service and inter-reception time are both plain X.
inline PaoiValue paoi_zero_wait_value(const ServiceDistribution& d) {
  const ExtendedReal m = mean(d);
  PaoiValue v;
  v.expected_received_service = m;
  v.expected_interreception = m;
  v.zeta = m + m;
  return v;
}

inline ExtendedReal paoi_zero_wait(const ServiceDistribution& d) {
  return paoi_zero_wait_value(d).zeta;
}

/// Threshold at x_min. Finite only when X has an atom at x_min; otherwise the
/// policy never completes an update and +inf is returned with a diagnostic.
/// The limit of zeta(theta) as theta -> x_min+ is a different quantity.
inline PaoiValue paoi_xmin_value(const ServiceDistribution& d) {
  const double x = support_min(d);
  if (atom_at_support_min(d) > 0.0) return paoi_fixed_threshold(d, x);
  PaoiValue v;
  v.zeta = v.expected_received_service = v.expected_interreception = ExtendedReal::infinity();
  v.diagnostic = "no atom at support minimum";
  return v;
}

inline ExtendedReal paoi_xmin(const ServiceDistribution& d) { return paoi_xmin_value(d).zeta; }

/// Deterministic-repetitive-threshold policy.
///
/// With P_j = prod_{i<=j} P(X > theta_i) and S_j = sum_{i<=j} theta_i,
///   E[Xr] = sum_{j>=0} P_j E[X 1{X <= theta_{j+1}}]
///   E[Y]  = E[Xr] + sum_{j>=1} P_j F(theta_{j+1}) S_j.
/// Past the listed thresholds the last one repeats, so the tail is a
/// geometric series in q = P(X > theta_R). It is summed in closed form over
/// N terms, N being the smallest count whose remainder
///   P_R q^N (2 m / F + S_R + theta_R (N + q / F))
/// drops below tolerance. The remainder is reported as truncation_bound.
inline PaoiValue paoi_repetitive(const ServiceDistribution& d, const ThresholdSequence& seq,
                                 double tolerance = kDefaultSeriesTolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("series tolerance must be positive");
  const double x_min = support_min(d);
  if (seq.min() < x_min) {
    throw std::invalid_argument("repetitive thresholds must not lie below the support minimum");
  }

  double prefix = 1.0;      // P_j
  double elapsed = 0.0;     // S_j
  double received = 0.0;    // E[Xr] partial sum
  double lost = 0.0;        // E[Y] - E[Xr] partial sum
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const double theta = seq.at(j + 1);
    received += prefix * truncated_first_moment(d, theta);
    lost += prefix * cdf(d, theta) * elapsed;
    prefix *= survival(d, theta);
    elapsed += theta;
  }

  PaoiValue v;
  std::size_t tail_terms = 0;
  if (prefix > 0.0) {
    const double theta = seq.at(seq.size());
    const double f = cdf(d, theta);
    const double q = survival(d, theta);
    if (f <= 0.0) {
      throw SeriesDiverged("threshold sequence never delivers an update: F(" +
                           std::to_string(theta) + ") = 0");
    }
    const double m = truncated_first_moment(d, theta);
    const double log_q = q > 0.5 ? std::log1p(-f) : (q > 0.0 ? std::log(q) : -INFINITY);
    auto q_pow = [&](double n) { return q > 0.0 ? std::exp(n * log_q) : 0.0; };
    auto remainder = [&](double n) {
      return prefix * q_pow(n) * (2.0 * m / f + elapsed + theta * (n + q / f));
    };

    double n = 1.0;
    if (remainder(n) >= tolerance) {
      double lo = 1.0, hi = 2.0;
      while (remainder(hi) >= tolerance) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw SeriesDiverged("series truncation bound does not contract");
      }
      while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        (remainder(mid) < tolerance ? hi : lo) = mid;
      }
      n = hi;
    }
    const double qn = q_pow(n);
    const double g0 = (1.0 - qn) / f;                 // sum_{i<n} q^i
    const double g1 = q * (1.0 - qn) / (f * f) - n * qn / f;  // sum_{i<n} i q^i
    received += prefix * m * g0;
    lost += prefix * f * (elapsed * g0 + theta * g1);
    v.truncation_bound = remainder(n);
    tail_terms = static_cast<std::size_t>(std::min(n, 1e18));
  }

  v.expected_received_service = received;
  v.expected_interreception = received + lost;
  v.zeta = v.expected_received_service + v.expected_interreception;
  v.series_terms = seq.size() + tail_terms;
  return v;
}

/// Dispatch over the policy taxonomy. Randomized thresholds have no closed form.
inline PaoiValue paoi_policy(const ServiceDistribution& d, const Policy& policy,
                             double tolerance = kDefaultSeriesTolerance) {
  return std::visit(
      [&](const auto& p) -> PaoiValue {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FixedThreshold>) return paoi_fixed_threshold(d, p.theta);
        else if constexpr (std::is_same_v<P, ZeroWait>) return paoi_zero_wait_value(d);
        else if constexpr (std::is_same_v<P, XMinThreshold>) return paoi_xmin_value(d);
        else if constexpr (std::is_same_v<P, RepetitiveSequence>) return paoi_repetitive(d, p.sequence, tolerance);
        else throw NoAnalyticForm("randomized-threshold policies have no analytic form; simulate them");
      },
      policy);
}

}  // namespace paoi
