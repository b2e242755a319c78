#pragma once

#include <vector>

#include "paoi/distributions.hpp"

namespace support {

/// Library counterparts of oracle::catalog(), same order and parameters.
inline std::vector<paoi::ServiceDistribution> catalog() {
  using paoi::ServiceDistribution;
  return {ServiceDistribution::exponential(1.3),
          ServiceDistribution::erlang(3, 1.0),
          ServiceDistribution::pareto(1.0, 2.5),
          ServiceDistribution::shifted_exponential(0.5, 2.0),
          ServiceDistribution::two_point(1.0, 3.0, 0.4),
          ServiceDistribution::hyperexponential({10.0, 1.0}, {0.5, 0.5}),
          ServiceDistribution::lognormal(0.0, 0.75),
          ServiceDistribution::deterministic(1.5)};
}

/// Thresholds spread over the bulk of the law, all at or above x_min.
inline std::vector<double> thetas(const paoi::ServiceDistribution& d, std::size_t n) {
  std::vector<double> out;
  const double lo = paoi::support_min(d);
  const double hi = std::max(paoi::quantile(d, 0.995), lo + 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  return out;
}

inline double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace support
