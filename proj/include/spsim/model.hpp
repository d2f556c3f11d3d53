#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spsim/rng.hpp"

namespace spsim {

/// A named scalar function of (theta, state) whose posterior moments are reported.
/// Test functions additionally drive the RNE-based M-phase stopping rule.
struct FunctionInfo {
  std::string name;
  bool is_test = false;
};

/// Bayesian model contract consumed by the engine.
///
/// Parameters live on the unconstrained (transformed) scale. The per-particle
/// state is an opaque fixed-length vector of doubles owned by the model; it
/// carries whatever lagged quantities the conditional density needs.
///
/// Every method must be safe to call concurrently from many threads.
class Model {
 public:
  virtual ~Model() = default;

  /// Stable identifier including hyperparameters; feeds the design config hash.
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t state_size() const { return 0; }

  virtual void sample_prior(RandomStream& stream, std::span<double> theta) const = 0;
  virtual double log_prior(std::span<const double> theta) const = 0;

  /// Sets the state that precedes the first observation.
  virtual void init_state(std::span<double> state) const;

  /// log p(y_t | y_{1:t-1}, theta). Advances `state` from t-1 to t.
  /// Returns -inf when the density cannot be evaluated.
  virtual double log_cond_density(std::span<const double> theta, std::span<double> state,
                                  double y) const = 0;

  /// log p(y_{1:t} | theta) from a fresh initial state; leaves `state` at t.
  /// The default loops over log_cond_density; models may override with a
  /// faster equivalent.
  virtual double log_likelihood(std::span<const double> theta, std::span<const double> ys,
                                std::span<double> state) const;

  virtual std::vector<FunctionInfo> functions() const { return {}; }
  virtual double evaluate_function(std::size_t index, std::span<const double> theta,
                                   std::span<const double> state) const;

  /// Whether simulate_next is available (needed for PIT).
  virtual bool can_simulate() const { return false; }
  /// Draws Y_{t+1} ~ p(Y | y_{1:t}, theta) given the state at t.
  virtual double simulate_next(std::span<const double> theta, std::span<const double> state,
                               RandomStream& stream) const;
};

}  // namespace spsim
