#pragma once

// Experiment configuration, read from a JSON file.
//
// {
//   "distribution": {"kind": "pareto", "params": {"xm": 1.0, "alpha": 3.0}},
//   "policies": ["zero-wait", {"type": "fixed", "theta": 2.0}],
//   "sweep": {"min": 1.01, "max": 20, "count": 200, "spacing": "linear"},
//   "simulation": {"peaks": 10000, "replications": 10, "seed": 1},
//   "optimizer": {"theta_min": 1.001, "theta_max": 50, "tol": 1e-8},
//   "output": {"dir": "out", "prefix": ""}
// }
//
// Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "paoi/distributions.hpp"
#include "paoi/errors.hpp"
#include "paoi/optimizer.hpp"
#include "paoi/policy.hpp"

namespace paoi {

using json = nlohmann::json;

struct PolicySpec {
  enum class Type { Fixed, ZeroWait, XMin, Median, Optimal, Repetitive, Randomized };
  Type type = Type::ZeroWait;
  double theta = 0.0;
  std::vector<double> thresholds;
  std::optional<ThresholdSampler> sampler;

  std::string label() const {
    switch (type) {
      case Type::Fixed: return policy_label(FixedThreshold{theta});
      case Type::ZeroWait: return "zero-wait";
      case Type::XMin: return "xmin";
      case Type::Median: return "median";
      case Type::Optimal: return "optimal";
      case Type::Repetitive: return policy_label(RepetitiveSequence{ThresholdSequence(thresholds)});
      case Type::Randomized: return policy_label(RandomizedThreshold{*sampler});
    }
    return "unknown";
  }
};

struct SweepSpec {
  std::optional<double> min;
  std::optional<double> max;
  std::size_t count = 200;
  bool log_spacing = false;
};

struct SimulationSpec {
  std::size_t peaks = 10'000;
  std::size_t replications = 10;
  std::uint64_t seed = 1;
  std::size_t batches = 30;
  std::size_t warmup = 0;
  std::uint64_t stall_limit = 1'000'000'000;
  bool export_peaks = false;
  double trajectory_horizon = 0.0;  // > 0 writes a sawtooth CSV per policy
};

struct OptimizerSpec {
  std::optional<double> theta_min;
  std::optional<double> theta_max;
  double tol = -1.0;  // negative: 1e-8 (theta_max - theta_min)
  std::size_t grid_points = kDefaultGridPoints;
  double bellman_tol = 1e-12;
};

struct ExperimentConfig {
  std::optional<ServiceDistribution> distribution;
  std::vector<PolicySpec> policies;
  SweepSpec sweep;
  SimulationSpec simulation;
  OptimizerSpec optimizer;
  std::filesystem::path output_dir = ".";
  std::string output_prefix;
  std::string figure;  // reproduce only

  const ServiceDistribution& require_distribution() const {
    if (!distribution) throw ConfigError("configuration has no \"distribution\" section");
    return *distribution;
  }

  ThresholdWindow window() const {
    const ThresholdWindow def = default_window(require_distribution());
    return {optimizer.theta_min.value_or(def.theta_min), optimizer.theta_max.value_or(def.theta_max)};
  }

  std::filesystem::path output_path(const std::string& name) const {
    return output_dir / (output_prefix + name);
  }
};

namespace detail {

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

inline double get_real(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing \"" + key + "\" in " + where);
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("\"" + key + "\" in " + where + " must be a number");
  return v.get<double>();
}

inline std::vector<double> get_reals(const json& obj, const std::string& key,
                                     const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing \"" + key + "\" in " + where);
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("\"" + key + "\" in " + where + " must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("\"" + key + "\" in " + where + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

template <class T>
T get_count(const json& obj, const std::string& key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("\"" + key + "\" in " + where + " must be a nonnegative integer");
  }
  return static_cast<T>(v.get<unsigned long long>());
}

}  // namespace detail

/// {kind, params}. Parameter names per kind:
///   exponential {rate}; erlang {shape, rate}; pareto {xm, alpha};
///   shifted_exponential {shift, rate}; two_point {t1, t2, p};
///   hyperexponential {rates: [...], weights: [...]}; lognormal {mu, sigma};
///   deterministic {value}.
inline ServiceDistribution parse_distribution(const json& j) {
  const std::string where = "distribution";
  detail::check_keys(j, {"kind", "params"}, where);
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("distribution needs a string \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  const std::string pw = "distribution.params";
  auto keys = [&](std::set<std::string> allowed) { detail::check_keys(params, allowed, pw); };
  auto real = [&](const char* k) { return detail::get_real(params, k, pw); };
  try {
    if (kind == "exponential") {
      keys({"rate"});
      return ServiceDistribution::exponential(real("rate"));
    }
    if (kind == "erlang") {
      keys({"shape", "rate"});
      const double shape = real("shape");
      if (shape != std::floor(shape)) throw ConfigError("erlang shape must be an integer");
      return ServiceDistribution::erlang(static_cast<int>(shape), real("rate"));
    }
    if (kind == "pareto") {
      keys({"xm", "alpha"});
      return ServiceDistribution::pareto(real("xm"), real("alpha"));
    }
    if (kind == "shifted_exponential") {
      keys({"shift", "rate"});
      return ServiceDistribution::shifted_exponential(real("shift"), real("rate"));
    }
    if (kind == "two_point") {
      keys({"t1", "t2", "p"});
      return ServiceDistribution::two_point(real("t1"), real("t2"), real("p"));
    }
    if (kind == "hyperexponential") {
      keys({"rates", "weights"});
      return ServiceDistribution::hyperexponential(detail::get_reals(params, "rates", pw),
                                                   detail::get_reals(params, "weights", pw));
    }
    if (kind == "lognormal") {
      keys({"mu", "sigma"});
      return ServiceDistribution::lognormal(real("mu"), real("sigma"));
    }
    if (kind == "deterministic") {
      keys({"value"});
      return ServiceDistribution::deterministic(real("value"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid distribution parameters: ") + e.what());
  }
  throw ConfigError("unknown distribution kind \"" + kind + "\"");
}

inline ThresholdSampler parse_sampler(const json& j) {
  const std::string where = "policy.sampler";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("sampler needs a string \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "uniform" || kind == "log_uniform") {
      detail::check_keys(j, {"kind", "low", "high"}, where);
      const double lo = detail::get_real(j, "low", where), hi = detail::get_real(j, "high", where);
      return kind == "uniform" ? ThresholdSampler::uniform(lo, hi)
                               : ThresholdSampler::log_uniform(lo, hi);
    }
    if (kind == "point") {
      detail::check_keys(j, {"kind", "theta"}, where);
      return ThresholdSampler::point_mass(detail::get_real(j, "theta", where));
    }
    if (kind == "discrete") {
      detail::check_keys(j, {"kind", "values", "weights"}, where);
      return ThresholdSampler::discrete(detail::get_reals(j, "values", where),
                                        detail::get_reals(j, "weights", where));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid sampler: ") + e.what());
  }
  throw ConfigError("unknown sampler kind \"" + kind + "\"");
}

/// A bare string ("zero-wait", "xmin", "median", "optimal") or an object with "type".
inline PolicySpec parse_policy(const json& j) {
  using T = PolicySpec::Type;
  PolicySpec spec;
  const std::string type = j.is_string() ? j.get<std::string>()
                           : (j.is_object() && j.contains("type") && j.at("type").is_string())
                               ? j.at("type").get<std::string>()
                               : throw ConfigError("policy must be a string or have a \"type\"");
  const std::string where = "policy \"" + type + "\"";
  auto keys = [&](std::set<std::string> allowed) {
    if (j.is_object()) detail::check_keys(j, allowed, where);
  };
  if (type == "zero-wait") {
    keys({"type"});
    spec.type = T::ZeroWait;
  } else if (type == "xmin") {
    keys({"type"});
    spec.type = T::XMin;
  } else if (type == "median") {
    keys({"type"});
    spec.type = T::Median;
  } else if (type == "optimal") {
    keys({"type"});
    spec.type = T::Optimal;
  } else if (type == "fixed") {
    if (!j.is_object()) throw ConfigError("fixed policy needs \"theta\"");
    keys({"type", "theta"});
    spec.type = T::Fixed;
    spec.theta = detail::get_real(j, "theta", where);
    if (!(spec.theta >= 0.0) || !std::isfinite(spec.theta)) {
      throw ConfigError("fixed threshold must be finite and nonnegative");
    }
  } else if (type == "repetitive") {
    if (!j.is_object()) throw ConfigError("repetitive policy needs \"thresholds\"");
    keys({"type", "thresholds"});
    spec.type = T::Repetitive;
    spec.thresholds = detail::get_reals(j, "thresholds", where);
    try {
      ThresholdSequence check(spec.thresholds);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (type == "randomized") {
    if (!j.is_object() || !j.contains("sampler")) throw ConfigError("randomized policy needs \"sampler\"");
    keys({"type", "sampler"});
    spec.type = T::Randomized;
    spec.sampler = parse_sampler(j.at("sampler"));
  } else {
    throw ConfigError("unknown policy type \"" + type + "\"");
  }
  return spec;
}

/// Turns a spec into a concrete policy. "optimal" needs the optimizer's theta_dagger.
inline Policy resolve_policy(const PolicySpec& spec, const ServiceDistribution& d,
                             std::optional<double> theta_dagger = std::nullopt) {
  using T = PolicySpec::Type;
  switch (spec.type) {
    case T::Fixed: return FixedThreshold{spec.theta};
    case T::ZeroWait: return ZeroWait{};
    case T::XMin: return XMinThreshold{};
    case T::Median: return median_threshold(d);
    case T::Optimal:
      if (!theta_dagger) throw std::logic_error("optimal policy needs theta_dagger");
      return FixedThreshold{*theta_dagger};
    case T::Repetitive: return RepetitiveSequence{ThresholdSequence(spec.thresholds)};
    case T::Randomized: return RandomizedThreshold{*spec.sampler};
  }
  throw std::logic_error("unhandled policy type");
}

inline ExperimentConfig parse_config(const json& j) {
  detail::check_keys(j, {"distribution", "policies", "sweep", "simulation", "optimizer", "output",
                         "figure"},
                     "configuration");
  ExperimentConfig cfg;
  if (j.contains("distribution")) cfg.distribution = parse_distribution(j.at("distribution"));

  if (j.contains("policies")) {
    if (!j.at("policies").is_array()) throw ConfigError("\"policies\" must be an array");
    for (const auto& p : j.at("policies")) cfg.policies.push_back(parse_policy(p));
  } else {
    for (const char* p : {"zero-wait", "xmin", "median", "optimal"}) {
      cfg.policies.push_back(parse_policy(json(p)));
    }
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    detail::check_keys(s, {"min", "max", "count", "spacing"}, "sweep");
    if (s.contains("min")) cfg.sweep.min = detail::get_real(s, "min", "sweep");
    if (s.contains("max")) cfg.sweep.max = detail::get_real(s, "max", "sweep");
    cfg.sweep.count = detail::get_count<std::size_t>(s, "count", cfg.sweep.count, "sweep");
    if (s.contains("spacing")) {
      const std::string sp = s.at("spacing").is_string() ? s.at("spacing").get<std::string>() : "";
      if (sp != "linear" && sp != "log") throw ConfigError("sweep.spacing must be \"linear\" or \"log\"");
      cfg.sweep.log_spacing = sp == "log";
    }
  }

  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    const std::string w = "simulation";
    detail::check_keys(s, {"peaks", "replications", "seed", "batches", "warmup", "stall_limit",
                           "export_peaks", "trajectory_horizon"},
                       w);
    auto& sim = cfg.simulation;
    sim.peaks = detail::get_count<std::size_t>(s, "peaks", sim.peaks, w);
    sim.replications = detail::get_count<std::size_t>(s, "replications", sim.replications, w);
    sim.seed = detail::get_count<std::uint64_t>(s, "seed", sim.seed, w);
    sim.batches = detail::get_count<std::size_t>(s, "batches", sim.batches, w);
    sim.warmup = detail::get_count<std::size_t>(s, "warmup", sim.warmup, w);
    sim.stall_limit = detail::get_count<std::uint64_t>(s, "stall_limit", sim.stall_limit, w);
    if (s.contains("export_peaks")) {
      if (!s.at("export_peaks").is_boolean()) throw ConfigError("simulation.export_peaks must be a boolean");
      sim.export_peaks = s.at("export_peaks").get<bool>();
    }
    if (s.contains("trajectory_horizon")) sim.trajectory_horizon = detail::get_real(s, "trajectory_horizon", w);
    if (sim.peaks < 2 || sim.replications < 1 || sim.batches < 2) {
      throw ConfigError("simulation needs peaks >= 2, replications >= 1, batches >= 2");
    }
  }

  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    const std::string w = "optimizer";
    detail::check_keys(o, {"theta_min", "theta_max", "tol", "grid_points", "bellman_tol"}, w);
    if (o.contains("theta_min")) cfg.optimizer.theta_min = detail::get_real(o, "theta_min", w);
    if (o.contains("theta_max")) cfg.optimizer.theta_max = detail::get_real(o, "theta_max", w);
    if (o.contains("tol")) cfg.optimizer.tol = detail::get_real(o, "tol", w);
    if (o.contains("bellman_tol")) cfg.optimizer.bellman_tol = detail::get_real(o, "bellman_tol", w);
    cfg.optimizer.grid_points =
        detail::get_count<std::size_t>(o, "grid_points", cfg.optimizer.grid_points, w);
    if (cfg.optimizer.grid_points < 2) throw ConfigError("optimizer.grid_points must be >= 2");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    detail::check_keys(o, {"dir", "prefix"}, "output");
    if (o.contains("dir")) cfg.output_dir = o.at("dir").get<std::string>();
    if (o.contains("prefix")) cfg.output_prefix = o.at("prefix").get<std::string>();
  }

  if (j.contains("figure")) {
    if (!j.at("figure").is_string()) throw ConfigError("\"figure\" must be a string");
    cfg.figure = j.at("figure").get<std::string>();
  }
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration has a wrongly typed value: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

}  // namespace paoi
