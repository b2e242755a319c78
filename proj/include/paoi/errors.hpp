#pragma once

#include <stdexcept>
#include <string>

namespace paoi {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Conditioning on an event of probability zero, e.g. E[X - t | X > t] with P(X > t) = 0.
struct DegenerateCondition : Error {
  using Error::Error;
};

/// A threshold sequence that never delivers an update.
struct SeriesDiverged : Error {
  using Error::Error;
};

/// The policy has no closed-form average peak age (randomized thresholds).
struct NoAnalyticForm : Error {
  using Error::Error;
};

struct InvalidWindow : Error {
  using Error::Error;
};

/// Bellman operator is not a contraction on the window (P(X > theta_min) = 1).
struct NoContraction : Error {
  using Error::Error;
};

/// Too many consecutive preemptions without a reception.
struct SimulationStall : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace paoi
