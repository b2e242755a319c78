#pragma once

// Sample-path simulation of the age process under work-conserving
// preemptive request policies.
//
// Time advances attempt by attempt: each attempt occupies min(theta_n, X_n);
// the update is received when X_n <= theta_n (ties favour reception),
// otherwise it is preempted and a fresh request goes out. Service and
// threshold draws come from separate streams so policies sharing a seed see
// the same service times.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "paoi/detail/parallel.hpp"
#include "paoi/distributions.hpp"
#include "paoi/errors.hpp"
#include "paoi/policy.hpp"

namespace paoi {

struct PeakRecord {
  std::size_t k = 0;                 // peak index, from 1
  double peak = 0.0;                 // A_k
  double received_service = 0.0;     // service time of the previous received update
  double interreception = 0.0;       // Y_k
  std::uint64_t preemption_count = 0;
  double receive_time = 0.0;         // D_{n_k}

  bool operator==(const PeakRecord&) const = default;
};

struct SimulationOptions {
  std::size_t warmup = 0;  // leading peaks dropped by the estimator
  std::uint64_t stall_limit = 1'000'000'000;
};

inline constexpr std::uint64_t kThresholdStreamOffset = 0x9E3779B97F4A7C15ULL;

/// Threshold for the r-th attempt after a reception.
class ThresholdSchedule {
public:
  ThresholdSchedule(const ServiceDistribution& d, Policy policy)
      : policy_(std::move(policy)), x_min_(support_min(d)) {}

  double operator()(std::size_t r, Rng& rng) const {
    return std::visit(
        [&](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, FixedThreshold>) return p.theta;
          else if constexpr (std::is_same_v<P, ZeroWait>) return std::numeric_limits<double>::infinity();
          else if constexpr (std::is_same_v<P, XMinThreshold>) return x_min_;
          else if constexpr (std::is_same_v<P, RepetitiveSequence>) return p.sequence.at(r);
          else return p.sampler.sample(rng);
        },
        policy_);
  }

private:
  Policy policy_;
  double x_min_;
};

/// Stateful peak generator. The update received at time zero has service
/// X_0, the first value drawn from the source, so Delta(0) = X_0.
template <class Source>
class PeakProcess {
public:
  PeakProcess(Source source, ThresholdSchedule schedule, Rng threshold_rng,
              std::uint64_t stall_limit)
      : source_(std::move(source)),
        schedule_(std::move(schedule)),
        threshold_rng_(threshold_rng),
        stall_limit_(stall_limit) {
    last_service_ = source_();
    initial_age_ = last_service_;
  }

  PeakRecord next() {
    double elapsed = 0.0;
    std::uint64_t preempted = 0;
    double service = 0.0;
    for (std::size_t r = 1;; ++r) {
      const double theta = schedule_(r, threshold_rng_);
      service = source_();
      if (service <= theta) {
        elapsed += service;
        break;
      }
      elapsed += theta;
      if (++preempted >= stall_limit_) {
        throw SimulationStall("no reception after " + std::to_string(preempted) +
                              " consecutive preemptions");
      }
    }
    PeakRecord rec;
    rec.k = ++count_;
    rec.received_service = last_service_;
    rec.interreception = elapsed;
    rec.peak = last_service_ + elapsed;
    rec.preemption_count = preempted;
    clock_ += elapsed;
    rec.receive_time = clock_;
    last_service_ = service;
    return rec;
  }

  /// Service time of the most recently received update (the age right after it lands).
  double last_service() const { return last_service_; }
  double initial_age() const { return initial_age_; }
  double clock() const { return clock_; }

private:
  Source source_;
  ThresholdSchedule schedule_;
  Rng threshold_rng_;
  std::uint64_t stall_limit_;
  double last_service_ = 0.0;
  double initial_age_ = 0.0;
  double clock_ = 0.0;
  std::size_t count_ = 0;
};

namespace detail {
inline auto service_source(const ServiceDistribution& d, std::uint64_t seed) {
  return [d, rng = Rng(seed)]() mutable { return sample(d, rng); };
}
}  // namespace detail

/// K peaks driven by an arbitrary service-time source (first call yields X_0).
template <class Source>
std::vector<PeakRecord> simulate_peaks_from(Source source, const ServiceDistribution& d,
                                            const Policy& policy, std::size_t peaks,
                                            std::uint64_t seed,
                                            const SimulationOptions& options = {}) {
  if (peaks < 1) throw std::invalid_argument("peak budget must be at least 1");
  PeakProcess<Source> process(std::move(source), ThresholdSchedule(d, policy),
                              Rng(seed + kThresholdStreamOffset), options.stall_limit);
  std::vector<PeakRecord> out;
  out.reserve(peaks);
  for (std::size_t k = 0; k < peaks; ++k) out.push_back(process.next());
  return out;
}

inline std::vector<PeakRecord> simulate_peaks(const ServiceDistribution& d, const Policy& policy,
                                              std::size_t peaks, std::uint64_t seed,
                                              const SimulationOptions& options = {}) {
  return simulate_peaks_from(detail::service_source(d, seed), d, policy, peaks, seed, options);
}

struct AgeDrop {
  double time;
  double age_before;  // Delta(t-), the peak
  double age_after;   // Delta(t+), service time of the update just received
};

struct AgeTrajectory {
  double initial_age = 0.0;  // Delta(0)
  std::vector<AgeDrop> drops;

  /// Delta(t) for 0 <= t; right-continuous at drops.
  double age_at(double t) const {
    double last_time = 0.0, last_age = initial_age;
    for (const auto& d : drops) {
      if (d.time > t) break;
      last_time = d.time;
      last_age = d.age_after;
    }
    return last_age + (t - last_time);
  }
};

/// Sawtooth Delta(t) on [0, horizon]: receptions with D <= horizon.
inline AgeTrajectory aoi_trajectory(const ServiceDistribution& d, const Policy& policy,
                                    double horizon, std::uint64_t seed,
                                    const SimulationOptions& options = {}) {
  if (!(horizon > 0.0)) throw std::invalid_argument("trajectory horizon must be positive");
  auto source = detail::service_source(d, seed);
  PeakProcess<decltype(source)> process(std::move(source), ThresholdSchedule(d, policy),
                                        Rng(seed + kThresholdStreamOffset), options.stall_limit);
  AgeTrajectory traj;
  traj.initial_age = process.initial_age();
  for (;;) {
    const PeakRecord rec = process.next();
    if (rec.receive_time > horizon) break;
    traj.drops.push_back({rec.receive_time, rec.peak, process.last_service()});
  }
  return traj;
}

struct PaoiEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t peak_count = 0;
  std::uint64_t seed = 0;
  std::vector<double> batch_means;
};

inline constexpr std::size_t kDefaultBatches = 30;
inline constexpr double kZ95 = 1.96;

namespace detail {
inline PaoiEstimate from_batches(double mean, std::vector<double> batch_means,
                                 std::size_t peak_count, std::uint64_t seed) {
  PaoiEstimate e;
  e.mean = mean;
  e.peak_count = peak_count;
  e.seed = seed;
  const std::size_t nb = batch_means.size();
  if (nb >= 2) {
    const double bm = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) / nb;
    double ss = 0.0;
    for (double b : batch_means) ss += (b - bm) * (b - bm);
    e.std_error = std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb));
  }
  e.ci_low = e.mean - kZ95 * e.std_error;
  e.ci_high = e.mean + kZ95 * e.std_error;
  e.batch_means = std::move(batch_means);
  return e;
}
}  // namespace detail

/// Sample mean of the peaks with a batch-means standard error (adjacent
/// peaks share a service time, so they are not independent).
inline PaoiEstimate estimate_paoi(std::span<const PeakRecord> peaks,
                                  std::size_t batches = kDefaultBatches, std::size_t warmup = 0,
                                  std::uint64_t seed = 0) {
  if (peaks.size() < warmup + 2) {
    throw std::invalid_argument("need at least two peaks after warm-up");
  }
  const auto used = peaks.subspan(warmup);
  const std::size_t nb = std::clamp<std::size_t>(batches, 2, used.size());
  const std::size_t size = used.size() / nb;
  std::vector<double> means(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t i = b * size; i < (b + 1) * size; ++i) means[b] += used[i].peak;
    means[b] /= static_cast<double>(size);
  }
  double total = 0.0;
  for (const auto& p : used) total += p.peak;
  return detail::from_batches(total / static_cast<double>(used.size()), std::move(means),
                              used.size(), seed);
}

/// Pools replications: peak-weighted grand mean, standard error from all
/// batch means together.
inline PaoiEstimate pool_estimates(std::span<const PaoiEstimate> runs) {
  if (runs.empty()) throw std::invalid_argument("nothing to pool");
  double weighted = 0.0;
  std::size_t peaks = 0;
  std::vector<double> all;
  for (const auto& r : runs) {
    weighted += r.mean * static_cast<double>(r.peak_count);
    peaks += r.peak_count;
    all.insert(all.end(), r.batch_means.begin(), r.batch_means.end());
  }
  return detail::from_batches(weighted / static_cast<double>(peaks), std::move(all), peaks,
                              runs.front().seed);
}

struct ReplicationReport {
  std::vector<PaoiEstimate> runs;  // replication i uses seed base_seed + i
  PaoiEstimate pooled;
};

/// Independent replications, run in parallel and reduced by index.
inline ReplicationReport run_replications(const ServiceDistribution& d, const Policy& policy,
                                          std::size_t peaks, std::size_t replications,
                                          std::uint64_t base_seed,
                                          const SimulationOptions& options = {},
                                          std::size_t batches = kDefaultBatches) {
  if (replications < 1) throw std::invalid_argument("need at least one replication");
  ReplicationReport report;
  report.runs.resize(replications);
  detail::parallel_for(replications, [&](std::size_t i) {
    const std::uint64_t seed = base_seed + i;
    const auto path = simulate_peaks(d, policy, peaks, seed, options);
    report.runs[i] = estimate_paoi(path, batches, options.warmup, seed);
  });
  report.pooled = pool_estimates(report.runs);
  return report;
}

/// Estimate under i.i.d. per-request thresholds.
inline PaoiEstimate simulate_randomized(const ServiceDistribution& d,
                                        const ThresholdSampler& sampler, std::size_t peaks,
                                        std::uint64_t seed, const SimulationOptions& options = {}) {
  const auto path = simulate_peaks(d, RandomizedThreshold{sampler}, peaks, seed, options);
  return estimate_paoi(path, kDefaultBatches, options.warmup, seed);
}

}  // namespace paoi
