#pragma once

// Work-conserving request policies: a new request goes out the instant an
// update is received, and attempt n is served for min(theta_n, X_n).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "paoi/distributions.hpp"

namespace paoi {

/// Thresholds used between two consecutive receptions; the last entry
/// repeats forever.
class ThresholdSequence {
public:
  explicit ThresholdSequence(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) throw std::invalid_argument("threshold sequence must be nonempty");
    for (double t : thresholds_) {
      if (!std::isfinite(t) || t < 0.0) {
        throw std::invalid_argument("thresholds must be finite and nonnegative");
      }
    }
  }

  /// Threshold of the r-th attempt after a reception, r >= 1.
  double at(std::size_t r) const {
    return r <= thresholds_.size() ? thresholds_[r - 1] : thresholds_.back();
  }
  std::size_t size() const { return thresholds_.size(); }
  const std::vector<double>& values() const { return thresholds_; }
  double min() const { return *std::min_element(thresholds_.begin(), thresholds_.end()); }

private:
  std::vector<double> thresholds_;
};

/// I.i.d. per-request threshold distribution on a bounded window.
class ThresholdSampler {
public:
  struct Uniform {
    double low, high;
  };
  struct LogUniform {
    double low, high;
  };
  struct PointMass {
    double theta;
  };
  struct Discrete {
    std::vector<double> values;
    std::vector<double> weights;
  };
  using Kind = std::variant<Uniform, LogUniform, PointMass, Discrete>;

  static ThresholdSampler uniform(double low, double high) {
    check_window(low, high);
    return ThresholdSampler(Uniform{low, high});
  }
  static ThresholdSampler log_uniform(double low, double high) {
    check_window(low, high);
    if (!(low > 0.0)) throw std::invalid_argument("log-uniform sampler needs low > 0");
    return ThresholdSampler(LogUniform{low, high});
  }
  static ThresholdSampler point_mass(double theta) {
    check_window(theta, theta);
    return ThresholdSampler(PointMass{theta});
  }
  static ThresholdSampler discrete(std::vector<double> values, std::vector<double> weights) {
    if (values.empty() || values.size() != weights.size()) {
      throw std::invalid_argument("discrete sampler needs matching nonempty values and weights");
    }
    for (double v : values) check_window(v, v);
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw std::invalid_argument("discrete sampler weights must be positive");
      total += w;
    }
    for (double& w : weights) w /= total;
    return ThresholdSampler(Discrete{std::move(values), std::move(weights)});
  }

  double sample(Rng& rng) const {
    return std::visit(
        [&rng](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) {
            return k.low + (k.high - k.low) * uniform_open01(rng);
          } else if constexpr (std::is_same_v<K, LogUniform>) {
            return k.low * std::exp(std::log(k.high / k.low) * uniform_open01(rng));
          } else if constexpr (std::is_same_v<K, PointMass>) {
            return k.theta;
          } else {
            const double u = uniform_open01(rng);
            double acc = 0.0;
            for (std::size_t i = 0; i < k.values.size(); ++i) {
              acc += k.weights[i];
              if (u <= acc) return k.values[i];
            }
            return k.values.back();
          }
        },
        kind_);
  }

  double lower() const {
    return std::visit(
        [](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PointMass>) return k.theta;
          else if constexpr (std::is_same_v<K, Discrete>) return *std::min_element(k.values.begin(), k.values.end());
          else return k.low;
        },
        kind_);
  }

  double upper() const {
    return std::visit(
        [](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PointMass>) return k.theta;
          else if constexpr (std::is_same_v<K, Discrete>) return *std::max_element(k.values.begin(), k.values.end());
          else return k.high;
        },
        kind_);
  }

  std::string describe() const {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    std::visit(
        [&os](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) os << "uniform[" << k.low << "," << k.high << "]";
          else if constexpr (std::is_same_v<K, LogUniform>) os << "loguniform[" << k.low << "," << k.high << "]";
          else if constexpr (std::is_same_v<K, PointMass>) os << "point(" << k.theta << ")";
          else {
            os << "discrete{";
            for (std::size_t i = 0; i < k.values.size(); ++i) {
              os << (i ? "," : "") << k.values[i] << ":" << k.weights[i];
            }
            os << "}";
          }
        },
        kind_);
    return os.str();
  }

  const Kind& kind() const { return kind_; }

private:
  explicit ThresholdSampler(Kind k) : kind_(std::move(k)) {}

  static void check_window(double low, double high) {
    if (!std::isfinite(low) || !std::isfinite(high) || low < 0.0 || high < low) {
      throw std::invalid_argument("threshold sampler window must satisfy 0 <= low <= high < inf");
    }
  }

  Kind kind_;
};

struct FixedThreshold {
  double theta;
};

/// Never preempts (theta = inf).
struct ZeroWait {};

/// Threshold pinned at the support minimum.
struct XMinThreshold {};

struct RepetitiveSequence {
  ThresholdSequence sequence;
};

struct RandomizedThreshold {
  ThresholdSampler sampler;
};

using Policy =
    std::variant<FixedThreshold, ZeroWait, XMinThreshold, RepetitiveSequence, RandomizedThreshold>;

/// Fixed threshold at the median service time.
inline Policy median_threshold(const ServiceDistribution& d) {
  return FixedThreshold{quantile(d, 0.5)};
}

inline std::string policy_label(const Policy& policy) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  std::visit(
      [&os](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FixedThreshold>) os << "fixed(" << p.theta << ")";
        else if constexpr (std::is_same_v<P, ZeroWait>) os << "zero-wait";
        else if constexpr (std::is_same_v<P, XMinThreshold>) os << "xmin";
        else if constexpr (std::is_same_v<P, RepetitiveSequence>) {
          os << "repetitive[";
          const auto& v = p.sequence.values();
          for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
          os << "]";
        } else {
          os << "randomized(" << p.sampler.describe() << ")";
        }
      },
      policy);
  return os.str();
}

}  // namespace paoi
