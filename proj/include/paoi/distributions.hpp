#pragma once

// Service-time distribution catalog.
//
// Every integral over [0, theta] is right-closed: an atom located at theta is
// counted, matching the right-continuous CDF.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "paoi/detail/quadrature.hpp"
#include "paoi/errors.hpp"
#include "paoi/extended_real.hpp"

namespace paoi {

using Rng = std::mt19937_64;

/// Uniform draw on the open interval (0, 1) from the top 53 bits.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

namespace dist {

inline constexpr double kQuadTolerance = 1e-10;
inline constexpr std::size_t kQuadMaxPanels = 10'000;

struct Exponential {
  double rate;

  double cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }
  double survival(double x) const { return x <= 0.0 ? 1.0 : std::exp(-rate * x); }
  double support_min() const { return 0.0; }
  ExtendedReal mean() const { return 1.0 / rate; }
  double truncated_first_moment(double t) const {
    return t <= 0.0 ? 0.0 : boost::math::gamma_p(2.0, rate * t) / rate;
  }
  double integrated_cdf(double t) const {
    return t <= 0.0 ? 0.0 : std::max(0.0, t * cdf(t) - truncated_first_moment(t));
  }
  double integrated_survival(double t) const {
    return t <= 0.0 ? std::max(t, 0.0) : -std::expm1(-rate * t) / rate;
  }
  ExtendedReal tail_integral(double t) const { return survival(t) / rate; }
  ExtendedReal conditional_residual(double /*t*/) const { return 1.0 / rate; }
  double quantile(double q) const { return -std::log1p(-q) / rate; }
  double sample(Rng& rng) const { return -std::log(uniform_open01(rng)) / rate; }
};

struct Erlang {
  int shape;
  double rate;

  double cdf(double x) const {
    return x <= 0.0 ? 0.0 : boost::math::gamma_p(static_cast<double>(shape), rate * x);
  }
  double survival(double x) const {
    return x <= 0.0 ? 1.0 : boost::math::gamma_q(static_cast<double>(shape), rate * x);
  }
  double support_min() const { return 0.0; }
  ExtendedReal mean() const { return shape / rate; }
  double truncated_first_moment(double t) const {
    if (t <= 0.0) return 0.0;
    return shape / rate * boost::math::gamma_p(shape + 1.0, rate * t);
  }
  double integrated_cdf(double t) const {
    return t <= 0.0 ? 0.0 : std::max(0.0, t * cdf(t) - truncated_first_moment(t));
  }
  double integrated_survival(double t) const {
    if (t <= 0.0) return 0.0;
    return t * survival(t) + truncated_first_moment(t);
  }
  // int_t^inf Q(k, rate x) dx = (1/rate) sum_{j=1..k} Q(j, rate t)
  ExtendedReal tail_integral(double t) const {
    const double u = rate * std::max(t, 0.0);
    double sum = 0.0;
    for (int j = 1; j <= shape; ++j) sum += boost::math::gamma_q(static_cast<double>(j), u);
    return sum / rate + std::max(-t, 0.0);
  }
  // Ratio of truncated exponential series; e^{-u} cancels so no underflow.
  ExtendedReal conditional_residual(double t) const {
    if (t < 0.0) return mean() + ExtendedReal(-t);
    const double u = rate * t;
    double term = 1.0, partial = 0.0, numer = 0.0;
    for (int j = 1; j <= shape; ++j) {
      partial += term;  // S_j = sum_{i<j} u^i / i!
      numer += partial;
      term *= u / j;
    }
    return numer / partial / rate;
  }
  double quantile(double q) const {
    return boost::math::gamma_p_inv(static_cast<double>(shape), q) / rate;
  }
  double sample(Rng& rng) const {
    double s = 0.0;
    for (int i = 0; i < shape; ++i) s -= std::log(uniform_open01(rng));
    return s / rate;
  }
};

struct Pareto {
  double scale;  // x_m
  double tail;   // alpha

  double cdf(double x) const { return x < scale ? 0.0 : -std::expm1(-tail * std::log(x / scale)); }
  double survival(double x) const { return x < scale ? 1.0 : std::pow(scale / x, tail); }
  double support_min() const { return scale; }
  ExtendedReal mean() const {
    if (tail <= 1.0) return ExtendedReal::infinity();
    return tail * scale / (tail - 1.0);
  }
  // (r^{1-alpha} - 1) / (1 - alpha), with r = t / x_m; log r at alpha = 1.
  double power_log(double t) const {
    const double log_ratio = std::log(t / scale);
    if (tail == 1.0) return log_ratio;
    return std::expm1((1.0 - tail) * log_ratio) / (1.0 - tail);
  }
  double truncated_first_moment(double t) const {
    return t < scale ? 0.0 : tail * scale * power_log(t);
  }
  double integrated_cdf(double t) const {
    if (t < scale) return 0.0;
    return std::max(0.0, scale * (std::expm1(std::log(t / scale)) - power_log(t)));
  }
  double integrated_survival(double t) const {
    if (t < scale) return std::max(t, 0.0);
    return scale + scale * power_log(t);
  }
  ExtendedReal tail_integral(double t) const {
    if (tail <= 1.0) return ExtendedReal::infinity();
    if (t < scale) return (scale - std::max(t, 0.0)) + scale / (tail - 1.0);
    return t * survival(t) / (tail - 1.0);
  }
  ExtendedReal conditional_residual(double t) const {
    if (tail <= 1.0) return ExtendedReal::infinity();
    if (t < scale) return tail_integral(t);
    return t / (tail - 1.0);
  }
  double quantile(double q) const { return scale * std::exp(-std::log1p(-q) / tail); }
  double sample(Rng& rng) const { return scale * std::pow(uniform_open01(rng), -1.0 / tail); }
};

struct ShiftedExponential {
  double shift;
  double rate;

  Exponential body() const { return {rate}; }
  double cdf(double x) const { return x < shift ? 0.0 : body().cdf(x - shift); }
  double survival(double x) const { return x < shift ? 1.0 : body().survival(x - shift); }
  double support_min() const { return shift; }
  ExtendedReal mean() const { return shift + 1.0 / rate; }
  double truncated_first_moment(double t) const {
    if (t < shift) return 0.0;
    return shift * body().cdf(t - shift) + body().truncated_first_moment(t - shift);
  }
  double integrated_cdf(double t) const {
    return t < shift ? 0.0 : body().integrated_cdf(t - shift);
  }
  double integrated_survival(double t) const {
    if (t < shift) return std::max(t, 0.0);
    return shift + body().integrated_survival(t - shift);
  }
  ExtendedReal tail_integral(double t) const {
    if (t < shift) return (shift - std::max(t, 0.0)) + 1.0 / rate;
    return body().survival(t - shift) / rate;
  }
  ExtendedReal conditional_residual(double t) const {
    if (t < shift) return (shift - t) + 1.0 / rate;
    return 1.0 / rate;
  }
  double quantile(double q) const { return shift + body().quantile(q); }
  double sample(Rng& rng) const { return shift + body().sample(rng); }
};

// X = t1 with probability p, t2 otherwise.
struct TwoPoint {
  double t1, t2, p;

  double cdf(double x) const { return x < t1 ? 0.0 : (x < t2 ? p : 1.0); }
  double survival(double x) const { return x < t1 ? 1.0 : (x < t2 ? 1.0 - p : 0.0); }
  double support_min() const { return t1; }
  ExtendedReal mean() const { return p * t1 + (1.0 - p) * t2; }
  double truncated_first_moment(double t) const {
    if (t < t1) return 0.0;
    if (t < t2) return p * t1;
    return p * t1 + (1.0 - p) * t2;
  }
  double integrated_cdf(double t) const {
    if (t <= t1) return 0.0;
    if (t <= t2) return p * (t - t1);
    return p * (t2 - t1) + (t - t2);
  }
  double integrated_survival(double t) const {
    if (t <= t1) return std::max(t, 0.0);
    if (t <= t2) return t1 + (1.0 - p) * (t - t1);
    return p * t1 + (1.0 - p) * t2;
  }
  ExtendedReal tail_integral(double t) const {
    return p * std::max(t1 - t, 0.0) + (1.0 - p) * std::max(t2 - t, 0.0);
  }
  ExtendedReal conditional_residual(double t) const {
    return tail_integral(t).value() / survival(t);
  }
  double quantile(double q) const { return q <= p ? t1 : t2; }
  double sample(Rng& rng) const { return uniform_open01(rng) <= p ? t1 : t2; }
};

struct HyperExponential {
  std::vector<double> rates;
  std::vector<double> weights;

  template <class Fn>
  double mix(Fn&& fn) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) s += weights[i] * fn(Exponential{rates[i]});
    return s;
  }
  double cdf(double x) const { return mix([x](const Exponential& e) { return e.cdf(x); }); }
  double survival(double x) const {
    return mix([x](const Exponential& e) { return e.survival(x); });
  }
  double support_min() const { return 0.0; }
  ExtendedReal mean() const { return mix([](const Exponential& e) { return 1.0 / e.rate; }); }
  double truncated_first_moment(double t) const {
    return mix([t](const Exponential& e) { return e.truncated_first_moment(t); });
  }
  double integrated_cdf(double t) const {
    return mix([t](const Exponential& e) { return e.integrated_cdf(t); });
  }
  double integrated_survival(double t) const {
    return mix([t](const Exponential& e) { return e.integrated_survival(t); });
  }
  ExtendedReal tail_integral(double t) const {
    return mix([t](const Exponential& e) { return e.tail_integral(t).value(); });
  }
  // Weights rescaled by exp(rate_min * t) so the ratio never underflows.
  ExtendedReal conditional_residual(double t) const {
    const double tt = std::max(t, 0.0);
    const double slowest = *std::min_element(rates.begin(), rates.end());
    double numer = 0.0, denom = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const double w = weights[i] * std::exp(-(rates[i] - slowest) * tt);
      numer += w / rates[i];
      denom += w;
    }
    return numer / denom + std::max(-t, 0.0);
  }
  double quantile(double q) const {
    const double slowest = *std::min_element(rates.begin(), rates.end());
    double lo = 0.0, hi = -std::log1p(-q) / slowest;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (cdf(mid) >= q ? hi : lo) = mid;
    }
    return hi;
  }
  double sample(Rng& rng) const {
    const double u = uniform_open01(rng);
    double acc = 0.0;
    std::size_t pick = rates.size() - 1;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      acc += weights[i];
      if (u <= acc) {
        pick = i;
        break;
      }
    }
    return Exponential{rates[pick]}.sample(rng);
  }
};

// Integrals go through adaptive quadrature.
struct LogNormal {
  double mu;
  double sigma;

  double z(double x) const { return (std::log(x) - mu) / (sigma * std::sqrt(2.0)); }
  double cdf(double x) const { return x <= 0.0 ? 0.0 : 0.5 * std::erfc(-z(x)); }
  double survival(double x) const { return x <= 0.0 ? 1.0 : 0.5 * std::erfc(z(x)); }
  double density(double x) const {
    if (x <= 0.0) return 0.0;
    const double zz = z(x);
    return std::exp(-zz * zz) / (x * sigma * std::sqrt(2.0 * M_PI));
  }
  double support_min() const { return 0.0; }
  ExtendedReal mean() const { return std::exp(mu + 0.5 * sigma * sigma); }
  double truncated_first_moment(double t) const {
    if (t <= 0.0) return 0.0;
    return detail::integrate([this](double x) { return x * density(x); }, 0.0, t,
                             kQuadTolerance, kQuadMaxPanels)
        .value;
  }
  double integrated_cdf(double t) const {
    if (t <= 0.0) return 0.0;
    return detail::integrate([this](double x) { return cdf(x); }, 0.0, t, kQuadTolerance,
                             kQuadMaxPanels)
        .value;
  }
  double integrated_survival(double t) const {
    if (t <= 0.0) return 0.0;
    return detail::integrate([this](double x) { return survival(x); }, 0.0, t,
                             kQuadTolerance, kQuadMaxPanels)
        .value;
  }
  ExtendedReal tail_integral(double t) const {
    const double from = std::max(t, 0.0);
    const double body = detail::integrate_to_infinity([this](double x) { return survival(x); },
                                                      from, kQuadTolerance, kQuadMaxPanels)
                            .value;
    return std::max(body, 0.0) + std::max(-t, 0.0);
  }
  ExtendedReal conditional_residual(double t) const {
    return tail_integral(t).value() / survival(t);
  }
  double quantile(double q) const {
    return std::exp(mu - sigma * std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q));
  }
  double sample(Rng& rng) const { return quantile(uniform_open01(rng)); }
};

struct Deterministic {
  double value;

  double cdf(double x) const { return x < value ? 0.0 : 1.0; }
  double survival(double x) const { return x < value ? 1.0 : 0.0; }
  double support_min() const { return value; }
  ExtendedReal mean() const { return value; }
  double truncated_first_moment(double t) const { return t < value ? 0.0 : value; }
  double integrated_cdf(double t) const { return std::max(t - value, 0.0); }
  double integrated_survival(double t) const { return std::clamp(t, 0.0, value); }
  ExtendedReal tail_integral(double t) const { return std::max(value - t, 0.0); }
  ExtendedReal conditional_residual(double t) const { return value - t; }
  double quantile(double /*q*/) const { return value; }
  double sample(Rng& /*rng*/) const { return value; }
};

}  // namespace dist

/// Immutable service-time distribution; one of the catalog kinds.
class ServiceDistribution {
public:
  using Kind = std::variant<dist::Exponential, dist::Erlang, dist::Pareto,
                            dist::ShiftedExponential, dist::TwoPoint, dist::HyperExponential,
                            dist::LogNormal, dist::Deterministic>;

  static ServiceDistribution exponential(double rate) {
    require_positive(rate, "exponential rate");
    return ServiceDistribution(dist::Exponential{rate});
  }
  static ServiceDistribution erlang(int shape, double rate) {
    if (shape < 1) throw std::invalid_argument("erlang shape must be >= 1");
    require_positive(rate, "erlang rate");
    return ServiceDistribution(dist::Erlang{shape, rate});
  }
  static ServiceDistribution pareto(double scale, double tail) {
    require_positive(scale, "pareto scale x_m");
    require_positive(tail, "pareto tail index alpha");
    return ServiceDistribution(dist::Pareto{scale, tail});
  }
  static ServiceDistribution shifted_exponential(double shift, double rate) {
    require_positive(shift, "shifted exponential shift");
    require_positive(rate, "shifted exponential rate");
    return ServiceDistribution(dist::ShiftedExponential{shift, rate});
  }
  static ServiceDistribution two_point(double t1, double t2, double p) {
    if (!(t1 > 0.0 && t2 > t1)) throw std::invalid_argument("two-point requires 0 < t1 < t2");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("two-point requires 0 < p < 1");
    return ServiceDistribution(dist::TwoPoint{t1, t2, p});
  }
  static ServiceDistribution hyperexponential(std::vector<double> rates,
                                              std::vector<double> weights) {
    if (rates.empty() || rates.size() != weights.size()) {
      throw std::invalid_argument("hyperexponential needs matching nonempty rates and weights");
    }
    for (double r : rates) require_positive(r, "hyperexponential rate");
    for (double w : weights) require_positive(w, "hyperexponential weight");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("hyperexponential weights must sum to 1");
    }
    for (double& w : weights) w /= total;
    return ServiceDistribution(dist::HyperExponential{std::move(rates), std::move(weights)});
  }
  static ServiceDistribution lognormal(double mu, double sigma) {
    if (!std::isfinite(mu)) throw std::invalid_argument("lognormal mu must be finite");
    require_positive(sigma, "lognormal sigma");
    return ServiceDistribution(dist::LogNormal{mu, sigma});
  }
  static ServiceDistribution deterministic(double value) {
    require_positive(value, "deterministic value");
    return ServiceDistribution(dist::Deterministic{value});
  }

  const Kind& kind() const { return kind_; }

  template <class Fn>
  decltype(auto) visit(Fn&& fn) const {
    return std::visit(std::forward<Fn>(fn), kind_);
  }

  template <class K>
  bool is() const {
    return std::holds_alternative<K>(kind_);
  }

private:
  explicit ServiceDistribution(Kind k) : kind_(std::move(k)) {}

  static void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + " must be a positive finite real");
    }
  }

  Kind kind_;
};

namespace detail {
inline void require_nonnegative(double x, const char* what) {
  if (std::isnan(x) || x < 0.0) {
    throw std::invalid_argument(std::string(what) + " must be nonnegative");
  }
}
}  // namespace detail

/// P(X <= x).
inline double cdf(const ServiceDistribution& d, double x) {
  return d.visit([x](const auto& k) { return k.cdf(x); });
}

/// P(X > x), computed directly rather than as 1 - cdf.
inline double survival(const ServiceDistribution& d, double x) {
  return d.visit([x](const auto& k) { return k.survival(x); });
}

/// Smallest point of the support (x_min).
inline double support_min(const ServiceDistribution& d) {
  return d.visit([](const auto& k) { return k.support_min(); });
}

inline ExtendedReal mean(const ServiceDistribution& d) {
  return d.visit([](const auto& k) { return k.mean(); });
}

/// E[X 1{X <= theta}].
inline double truncated_first_moment(const ServiceDistribution& d, double theta) {
  detail::require_nonnegative(theta, "theta");
  return d.visit([theta](const auto& k) { return k.truncated_first_moment(theta); });
}

/// Integral of F over [0, theta].
inline double integrated_cdf(const ServiceDistribution& d, double theta) {
  detail::require_nonnegative(theta, "theta");
  return d.visit([theta](const auto& k) { return k.integrated_cdf(theta); });
}

/// Integral of 1 - F over [0, theta], i.e. theta - integrated_cdf(d, theta)
/// without the cancellation at large theta.
inline double integrated_survival(const ServiceDistribution& d, double theta) {
  detail::require_nonnegative(theta, "theta");
  return d.visit([theta](const auto& k) { return k.integrated_survival(theta); });
}

/// E[(X - theta)^+].
inline ExtendedReal tail_integral(const ServiceDistribution& d, double theta) {
  detail::require_nonnegative(theta, "theta");
  return d.visit([theta](const auto& k) { return k.tail_integral(theta); });
}

/// E[X 1{X > theta}] = E[(X - theta)^+] + theta P(X > theta).
inline ExtendedReal upper_first_moment(const ServiceDistribution& d, double theta) {
  return tail_integral(d, theta) + ExtendedReal(theta * survival(d, theta));
}

/// E[X - theta | X > theta].
inline ExtendedReal conditional_residual(const ServiceDistribution& d, double theta) {
  detail::require_nonnegative(theta, "theta");
  if (survival(d, theta) <= 0.0) {
    throw DegenerateCondition("conditional residual: P(X > " + std::to_string(theta) +
                              ") = 0");
  }
  return d.visit([theta](const auto& k) { return k.conditional_residual(theta); });
}

/// Generalized inverse inf{x : F(x) >= q}.
inline double quantile(const ServiceDistribution& d, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must be in (0, 1)");
  return d.visit([q](const auto& k) { return k.quantile(q); });
}

inline double sample(const ServiceDistribution& d, Rng& rng) {
  return d.visit([&rng](const auto& k) { return k.sample(rng); });
}

/// Probability mass sitting exactly at the support minimum.
inline double atom_at_support_min(const ServiceDistribution& d) {
  return cdf(d, support_min(d));
}

/// Configuration-file kind tag.
inline std::string kind_name(const ServiceDistribution& d) {
  return d.visit([](const auto& k) -> std::string {
    using K = std::decay_t<decltype(k)>;
    if constexpr (std::is_same_v<K, dist::Exponential>) return "exponential";
    else if constexpr (std::is_same_v<K, dist::Erlang>) return "erlang";
    else if constexpr (std::is_same_v<K, dist::Pareto>) return "pareto";
    else if constexpr (std::is_same_v<K, dist::ShiftedExponential>) return "shifted_exponential";
    else if constexpr (std::is_same_v<K, dist::TwoPoint>) return "two_point";
    else if constexpr (std::is_same_v<K, dist::HyperExponential>) return "hyperexponential";
    else if constexpr (std::is_same_v<K, dist::LogNormal>) return "lognormal";
    else return "deterministic";
  });
}

/// Human-readable label, e.g. "pareto(xm=1,alpha=3)".
inline std::string describe(const ServiceDistribution& d) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << kind_name(d) << '(';
  d.visit([&os](const auto& k) {
    using K = std::decay_t<decltype(k)>;
    if constexpr (std::is_same_v<K, dist::Exponential>) os << "rate=" << k.rate;
    else if constexpr (std::is_same_v<K, dist::Erlang>) os << "shape=" << k.shape << ",rate=" << k.rate;
    else if constexpr (std::is_same_v<K, dist::Pareto>) os << "xm=" << k.scale << ",alpha=" << k.tail;
    else if constexpr (std::is_same_v<K, dist::ShiftedExponential>) os << "shift=" << k.shift << ",rate=" << k.rate;
    else if constexpr (std::is_same_v<K, dist::TwoPoint>) os << "t1=" << k.t1 << ",t2=" << k.t2 << ",p=" << k.p;
    else if constexpr (std::is_same_v<K, dist::HyperExponential>) {
      for (std::size_t i = 0; i < k.rates.size(); ++i) {
        os << (i ? "," : "") << k.weights[i] << "@" << k.rates[i];
      }
    } else if constexpr (std::is_same_v<K, dist::LogNormal>) os << "mu=" << k.mu << ",sigma=" << k.sigma;
    else os << "value=" << k.value;
  });
  os << ')';
  return os.str();
}

}  // namespace paoi
