#pragma once

// The paoi-lab subcommands. Each takes a parsed configuration, writes its
// CSV files under the configured output directory, prints a short report to
// `out` and returns the process exit code. Errors propagate as exceptions;
// exit_code_for() maps them.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "paoi/analytic.hpp"
#include "paoi/config.hpp"
#include "paoi/csv.hpp"
#include "paoi/optimizer.hpp"
#include "paoi/simulator.hpp"

namespace paoi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSimulation = 3;

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidWindow*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const SimulationStall*>(&e)) return kExitSimulation;
  return kExitFailure;
}

namespace detail {

/// Filename-safe form of a policy label: "fixed(2.5)" -> "fixed_2.5".
inline std::string file_token(const std::string& label) {
  std::string out;
  for (char c : label) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    if (keep) out += c;
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "policy" : out;
}

inline void prepare_output(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
}

inline std::vector<double> sweep_grid(const ExperimentConfig& cfg) {
  const ServiceDistribution& d = cfg.require_distribution();
  const ThresholdWindow def = cfg.window();
  const ThresholdWindow w{cfg.sweep.min.value_or(def.theta_min), cfg.sweep.max.value_or(def.theta_max)};
  validate_window(d, w);
  if (cfg.sweep.count < 2) throw ConfigError("sweep.count must be at least 2");
  if (cfg.sweep.log_spacing && !(w.theta_min > 0.0)) {
    throw InvalidWindow("log-spaced sweep needs theta_min > 0");
  }
  std::vector<double> grid(cfg.sweep.count);
  const double n = static_cast<double>(grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = static_cast<double>(i) / n;
    grid[i] = cfg.sweep.log_spacing
                  ? w.theta_min * std::exp(s * std::log(w.theta_max / w.theta_min))
                  : w.theta_min + s * (w.theta_max - w.theta_min);
  }
  grid.front() = w.theta_min;
  grid.back() = w.theta_max;
  return grid;
}

/// Index of the smallest finite value, first on ties; nullopt if none is finite.
inline std::optional<std::size_t> argmin_finite(const std::vector<double>& v) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i]) && (!best || v[i] < v[*best])) best = i;
  }
  return best;
}

/// Resolves every configured policy; "optimal" triggers one optimizer run.
inline std::vector<std::pair<std::string, Policy>> resolve_all(const ExperimentConfig& cfg) {
  const ServiceDistribution& d = cfg.require_distribution();
  std::optional<double> theta_dagger;
  std::vector<std::pair<std::string, Policy>> out;
  for (const auto& spec : cfg.policies) {
    if (spec.type == PolicySpec::Type::Optimal && !theta_dagger) {
      theta_dagger = optimal_threshold(d, cfg.window(), cfg.optimizer.tol, cfg.optimizer.grid_points).theta;
    }
    out.emplace_back(spec.label(), resolve_policy(spec, d, theta_dagger));
  }
  return out;
}

}  // namespace detail

/// zeta, E[Xr] and E[Y] per configured policy.
inline int cmd_eval(const ExperimentConfig& cfg, std::ostream& out) {
  const ServiceDistribution& d = cfg.require_distribution();
  out << "distribution " << describe(d) << "\n";
  out << "policy,zeta,e_x_check,e_y\n";
  for (const auto& [label, policy] : detail::resolve_all(cfg)) {
    out << label << ',';
    if (std::holds_alternative<RandomizedThreshold>(policy)) {
      out << "n/a,n/a,n/a  # no closed form, use simulate\n";
      continue;
    }
    const PaoiValue v = paoi_policy(d, policy);
    out << format_real(v.zeta) << ',' << format_real(v.expected_received_service) << ','
        << format_real(v.expected_interreception);
    if (!v.diagnostic.empty()) out << "  # " << v.diagnostic;
    out << '\n';
  }
  return kExitOk;
}

/// sweep.csv: theta,zeta,e_x_check,e_y,is_minimum, ordered by theta.
inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  const ServiceDistribution& d = cfg.require_distribution();
  const std::vector<double> grid = detail::sweep_grid(cfg);
  std::vector<PaoiValue> values(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t i) { values[i] = paoi_fixed_threshold(d, grid[i]); });
  std::vector<double> zeta(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) zeta[i] = values[i].zeta.value();
  const auto best = detail::argmin_finite(zeta);

  detail::prepare_output(cfg);
  const auto path = cfg.output_path("sweep.csv");
  CsvWriter csv(path, {"theta", "zeta", "e_x_check", "e_y", "is_minimum"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv.row({format_real(grid[i]), format_real(values[i].zeta),
             format_real(values[i].expected_received_service),
             format_real(values[i].expected_interreception), best && *best == i ? "1" : "0"});
  }
  out << "distribution " << describe(d) << "\n";
  out << "wrote " << grid.size() << " rows to " << path.string() << "\n";
  if (best) {
    out << "grid minimum zeta=" << format_real(zeta[*best]) << " at theta=" << format_real(grid[*best])
        << "\n";
  } else {
    out << "no finite zeta on the sweep\n";
  }
  return kExitOk;
}

/// optimize.csv: one row with the optimizer result, preemption verdict and
/// the Bellman cross-check. Value iteration starts from the smaller endpoint
/// value, an upper bound of the fixed point.
inline int cmd_optimize(const ExperimentConfig& cfg, std::ostream& out) {
  const ServiceDistribution& d = cfg.require_distribution();
  const ThresholdWindow w = cfg.window();
  const auto& o = cfg.optimizer;
  const OptimizationResult r = min_achievable_paoi(d, w, o.tol, o.grid_points);
  const PreemptionVerdict verdict = preemption_beneficial(d, w, o.grid_points);
  const ThresholdSearch grid_only = optimal_threshold(d, w, o.tol, o.grid_points);

  std::optional<BellmanResult> bellman;
  std::string bellman_note;
  double bellman_delta = std::numeric_limits<double>::quiet_NaN();
  try {
    const ExtendedReal start = min(paoi_fixed_threshold(d, w.theta_min).zeta,
                                   paoi_fixed_threshold(d, w.theta_max).zeta);
    bellman = bellman_fixed_point(d, w, o.bellman_tol, o.grid_points, 10'000'000,
                                  start.is_finite() ? start.value() : 0.0);
    if (grid_only.grid_zeta.is_finite()) {
      bellman_delta = std::abs(bellman->fixed_point - grid_only.grid_zeta.value()) /
                      grid_only.grid_zeta.value();
    }
  } catch (const NoContraction& e) {
    bellman_note = e.what();
  }

  detail::prepare_output(cfg);
  const auto path = cfg.output_path("optimize.csv");
  CsvWriter csv(path, {"theta_dagger", "zeta_at_theta_dagger", "zeta_star", "winner",
                       "zeta_zero_wait", "zeta_xmin", "theta_min", "theta_max",
                       "preemption_beneficial", "bellman_fixed_point", "bellman_rel_delta",
                       "evaluations"});
  csv.row({format_real(r.theta_dagger), format_real(r.zeta_at_theta_dagger), format_real(r.zeta_star),
           to_string(r.winner), format_real(r.zeta_zero_wait), format_real(r.zeta_xmin),
           format_real(w.theta_min), format_real(w.theta_max), verdict.beneficial ? "1" : "0",
           bellman ? format_real(bellman->fixed_point) : "nan", format_real(bellman_delta),
           std::to_string(r.evaluations)});

  out << "distribution " << describe(d) << "\n";
  out << "window [" << format_real(w.theta_min) << ", " << format_real(w.theta_max) << "]\n";
  out << "theta_dagger " << format_real(r.theta_dagger) << "\n";
  out << "zeta(theta_dagger) " << format_real(r.zeta_at_theta_dagger) << "\n";
  out << "zeta zero-wait " << format_real(r.zeta_zero_wait) << "\n";
  out << "zeta xmin " << format_real(r.zeta_xmin);
  if (!r.xmin_diagnostic.empty()) out << "  # " << r.xmin_diagnostic;
  out << "\n";
  out << "zeta_star " << format_real(r.zeta_star) << " (winner " << to_string(r.winner) << ")\n";
  out << "preemption beneficial " << (verdict.beneficial ? "yes" : "no") << ", margin "
      << format_real(verdict.margin) << "\n";
  if (bellman) {
    out << "bellman fixed point " << format_real(bellman->fixed_point) << " after "
        << bellman->iterations << " sweeps, relative delta " << format_real(bellman_delta) << "\n";
  } else {
    out << "bellman check skipped: " << bellman_note << "\n";
  }
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

namespace detail {

inline void write_estimate_row(CsvWriter& csv, const std::string& replication,
                               const PaoiEstimate& e) {
  csv.row({replication, std::to_string(e.seed), std::to_string(e.peak_count), format_real(e.mean),
           format_real(e.std_error), format_real(e.ci_low), format_real(e.ci_high)});
}

inline void write_peaks(const std::filesystem::path& path, const std::vector<PeakRecord>& peaks) {
  CsvWriter csv(path, {"k", "peak", "received_service", "interreception", "preemptions",
                       "receive_time"});
  for (const auto& p : peaks) {
    csv.row({std::to_string(p.k), format_real(p.peak), format_real(p.received_service),
             format_real(p.interreception), std::to_string(p.preemption_count),
             format_real(p.receive_time)});
  }
}

/// Corner points of the sawtooth, ready for a line plot.
inline void write_trajectory(const std::filesystem::path& path, const AgeTrajectory& traj,
                             double horizon) {
  CsvWriter csv(path, {"time", "age"});
  csv.row({"0", format_real(traj.initial_age)});
  for (const auto& drop : traj.drops) {
    csv.row({format_real(drop.time), format_real(drop.age_before)});
    csv.row({format_real(drop.time), format_real(drop.age_after)});
  }
  csv.row({format_real(horizon), format_real(traj.age_at(horizon))});
}

}  // namespace detail

/// simulate_<policy>.csv per policy: one row per replication plus a pooled row.
inline int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const ServiceDistribution& d = cfg.require_distribution();
  const auto& s = cfg.simulation;
  const SimulationOptions opts{s.warmup, s.stall_limit};
  detail::prepare_output(cfg);
  out << "distribution " << describe(d) << "\n";
  out << "policy,analytic_zeta,pooled_mean,stderr,ci_low,ci_high\n";
  for (const auto& [label, policy] : detail::resolve_all(cfg)) {
    const ReplicationReport report =
        run_replications(d, policy, s.peaks, s.replications, s.seed, opts, s.batches);
    const std::string token = detail::file_token(label);
    CsvWriter csv(cfg.output_path("simulate_" + token + ".csv"),
                  {"replication", "seed", "peaks", "mean", "stderr", "ci_low", "ci_high"});
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
      detail::write_estimate_row(csv, std::to_string(i), report.runs[i]);
    }
    detail::write_estimate_row(csv, "pooled", report.pooled);

    if (s.export_peaks) {
      detail::write_peaks(cfg.output_path("peaks_" + token + ".csv"),
                          simulate_peaks(d, policy, s.peaks, s.seed, opts));
    }
    if (s.trajectory_horizon > 0.0) {
      detail::write_trajectory(cfg.output_path("aoi_" + token + ".csv"),
                               aoi_trajectory(d, policy, s.trajectory_horizon, s.seed, opts),
                               s.trajectory_horizon);
    }

    std::string analytic = "n/a";
    if (!std::holds_alternative<RandomizedThreshold>(policy)) {
      analytic = format_real(paoi_policy(d, policy).zeta);
    }
    const auto& p = report.pooled;
    out << label << ',' << analytic << ',' << format_real(p.mean) << ',' << format_real(p.std_error)
        << ',' << format_real(p.ci_low) << ',' << format_real(p.ci_high) << '\n';
  }
  return kExitOk;
}

/// Preemption-benefit verdicts: the exact test, both sufficient conditions,
/// and the critical t2 for two-point laws.
inline int cmd_check(const ExperimentConfig& cfg, std::ostream& out) {
  const ServiceDistribution& d = cfg.require_distribution();
  const ThresholdWindow w = cfg.window();
  const std::vector<double> grid = threshold_grid(w, cfg.optimizer.grid_points);
  out << "distribution " << describe(d) << "\n";
  auto report = [&](const PreemptionVerdict& v) {
    out << to_string(v.condition_used) << ": " << (v.beneficial ? "beneficial" : "no witness");
    if (v.witness_theta) out << ", witness theta=" << format_real(*v.witness_theta);
    out << ", margin " << format_real(v.margin) << "\n";
  };
  report(preemption_beneficial(d, w, cfg.optimizer.grid_points));
  report(half_threshold_sufficient(d, grid));
  report(residual_exceeds_mean(d, grid));
  if (const auto* tp = std::get_if<dist::TwoPoint>(&d.kind())) {
    const double critical = twopoint_benefit_threshold(tp->p, tp->t1);
    out << "critical t2* " << format_real(critical) << " (t2 = " << format_real(tp->t2) << ", "
        << (tp->t2 > critical ? "above" : "not above") << ")\n";
  }
  return kExitOk;
}

// Figure bundles. fig4/fig6 are threshold sweeps (param,theta,zeta,is_minimum);
// fig5/fig7 compare policies (param,policy,zeta).

inline const std::vector<double>& pareto_alpha_grid() {
  static const std::vector<double> grid{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  return grid;
}

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig4", "fig5", "fig6", "fig7"};
  return ids;
}

namespace detail {

inline void sweep_rows(CsvWriter& csv, const std::string& param, const ServiceDistribution& d,
                       double lo, double hi, std::size_t count) {
  std::vector<double> theta(count), zeta(count);
  for (std::size_t i = 0; i < count; ++i) {
    theta[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  parallel_for(count, [&](std::size_t i) { zeta[i] = paoi_fixed_threshold(d, theta[i]).zeta.value(); });
  const auto best = argmin_finite(zeta);
  for (std::size_t i = 0; i < count; ++i) {
    csv.row({param, format_real(theta[i]), format_real(zeta[i]), best && *best == i ? "1" : "0"});
  }
}

inline void policy_rows(CsvWriter& csv, const std::string& param, const ServiceDistribution& d) {
  const OptimizationResult r = min_achievable_paoi(d, default_window(d));
  csv.row({param, "zero-wait", format_real(r.zeta_zero_wait)});
  csv.row({param, "optimal", format_real(r.zeta_star)});
  csv.row({param, "median", format_real(paoi_policy(d, median_threshold(d)).zeta)});
}

inline std::string param_token(double x) { return format_real(x); }

}  // namespace detail

inline constexpr std::size_t kFigureSweepPoints = 300;

/// Writes fig4.csv .. fig7.csv (or one of them). Returns the paths written.
inline std::vector<std::filesystem::path> reproduce_figures(const std::string& id,
                                                            const std::filesystem::path& dir,
                                                            const std::string& prefix = "") {
  std::vector<std::string> wanted;
  if (id == "all") wanted = figure_ids();
  else if (std::find(figure_ids().begin(), figure_ids().end(), id) != figure_ids().end()) wanted = {id};
  else throw ConfigError("unknown figure id \"" + id + "\" (expected fig4, fig5, fig6, fig7 or all)");

  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& fig : wanted) {
    const auto path = dir / (prefix + fig + ".csv");
    if (fig == "fig4") {
      CsvWriter csv(path, {"param", "theta", "zeta", "is_minimum"});
      for (int k = 1; k <= 4; ++k) {
        detail::sweep_rows(csv, std::to_string(k), ServiceDistribution::erlang(k, 1.0), 0.05, 15.0,
                           kFigureSweepPoints);
      }
    } else if (fig == "fig5") {
      CsvWriter csv(path, {"param", "policy", "zeta"});
      for (int k = 1; k <= 6; ++k) {
        detail::policy_rows(csv, std::to_string(k), ServiceDistribution::erlang(k, 1.0));
      }
    } else if (fig == "fig6") {
      CsvWriter csv(path, {"param", "theta", "zeta", "is_minimum"});
      for (double a : pareto_alpha_grid()) {
        detail::sweep_rows(csv, detail::param_token(a), ServiceDistribution::pareto(1.0, a), 1.01,
                           15.0, kFigureSweepPoints);
      }
    } else {
      CsvWriter csv(path, {"param", "policy", "zeta"});
      for (double a : pareto_alpha_grid()) {
        detail::policy_rows(csv, detail::param_token(a), ServiceDistribution::pareto(1.0, a));
      }
    }
    written.push_back(path);
  }
  return written;
}

inline int cmd_reproduce(const ExperimentConfig& cfg, const std::string& id, std::ostream& out) {
  for (const auto& p : reproduce_figures(id.empty() ? "all" : id, cfg.output_dir, cfg.output_prefix)) {
    out << "wrote " << p.string() << "\n";
  }
  return kExitOk;
}

}  // namespace paoi
