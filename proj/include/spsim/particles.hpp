#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spsim/model.hpp"

namespace spsim {

/// J groups of N particles, stored flat with particle (j, n) at j * N + n.
///
/// Per particle: the parameter vector (dim doubles), the model state
/// (state_size doubles), the log importance weight accumulated in the current
/// C phase, and the cumulative log-likelihood log p(y_{1:current_t} | theta).
/// Particles never move between groups.
struct ParticleSystem {
  std::size_t groups = 0;
  std::size_t per_group = 0;
  std::size_t dim = 0;
  std::size_t state_size = 0;
  std::vector<double> theta;
  std::vector<double> state;
  std::vector<double> log_weight;
  std::vector<double> log_likelihood;
  std::size_t current_t = 0;
  std::size_t cycle = 0;

  ParticleSystem() = default;
  ParticleSystem(std::size_t J, std::size_t N, std::size_t k, std::size_t state_len);

  std::size_t size() const { return groups * per_group; }
  std::size_t index(std::size_t j, std::size_t n) const { return j * per_group + n; }

  std::span<double> theta_of(std::size_t i) { return {theta.data() + i * dim, dim}; }
  std::span<const double> theta_of(std::size_t i) const { return {theta.data() + i * dim, dim}; }
  std::span<double> state_of(std::size_t i) {
    return {state.data() + i * state_size, state_size};
  }
  std::span<const double> state_of(std::size_t i) const {
    return {state.data() + i * state_size, state_size};
  }
  std::span<const double> group_log_weights(std::size_t j) const {
    return {log_weight.data() + j * per_group, per_group};
  }

  bool equally_weighted() const;

  friend bool operator==(const ParticleSystem&, const ParticleSystem&) = default;
};

/// Draws every particle i.i.d. from the prior; weights zero, states initial.
ParticleSystem init_particles(const Model& model, std::size_t J, std::size_t N,
                              std::uint64_t master_seed);

/// Adds log p(y_s | y_{1:s-1}, theta) to each particle's log weight and
/// cumulative log-likelihood, advancing its state. Throws NumericalError when
/// no particle retains a finite weight.
void c_phase_step(ParticleSystem& system, const Model& model, double y);

/// Relative sample size ESS / (JN) computed from log weights.
double rss(std::span<const double> log_weights);
inline double rss(const ParticleSystem& system) { return rss(system.log_weight); }

/// Group-wise self-normalized weighted means and their grand (unweighted
/// across groups) mean.
struct GroupMeans {
  std::vector<double> group_means;
  double grand_mean = 0.0;
};

GroupMeans weighted_group_means(std::span<const double> log_weights,
                                std::span<const double> values, std::size_t J, std::size_t N);

/// Evaluates model function `index` on every particle.
std::vector<double> evaluate_function(const ParticleSystem& system, const Model& model,
                                      std::size_t index);

// Binary snapshot: magic "SPSNAP01", then little-endian u64 J, N, k,
// state_size, current_t, cycle, then f64 arrays theta (J*N*k), state
// (J*N*state_size), log_weight (J*N), log_likelihood (J*N), row-major.
void write_snapshot(std::ostream& out, const ParticleSystem& system);
ParticleSystem read_snapshot(std::istream& in);

}  // namespace spsim
