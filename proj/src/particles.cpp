#include "spsim/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spsim/binary_io.hpp"
#include "spsim/error.hpp"
#include "spsim/parallel.hpp"
#include "spsim/reduce.hpp"

namespace spsim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::string_view kSnapshotMagic = "SPSNAP01";
}  // namespace

ParticleSystem::ParticleSystem(std::size_t J, std::size_t N, std::size_t k, std::size_t state_len)
    : groups(J),
      per_group(N),
      dim(k),
      state_size(state_len),
      theta(J * N * k),
      state(J * N * state_len),
      log_weight(J * N, 0.0),
      log_likelihood(J * N, 0.0) {}

bool ParticleSystem::equally_weighted() const {
  return std::all_of(log_weight.begin(), log_weight.end(), [](double w) { return w == 0.0; });
}

ParticleSystem init_particles(const Model& model, std::size_t J, std::size_t N,
                              std::uint64_t master_seed) {
  if (J < 2 || N < 2) throw UsageError("init_particles requires J >= 2 and N >= 2");
  ParticleSystem system(J, N, model.dim(), model.state_size());
  parallel_for(system.size(), [&](std::size_t i) {
    RandomStream stream({master_seed, static_cast<std::uint32_t>(i / N),
                         static_cast<std::uint32_t>(i % N), Phase::init, 0, 0});
    model.sample_prior(stream, system.theta_of(i));
    model.init_state(system.state_of(i));
  });
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto th = system.theta_of(i);
    if (!std::all_of(th.begin(), th.end(), [](double v) { return std::isfinite(v); })) {
      throw NumericalError("prior sampler of model " + model.id() +
                           " produced a non-finite draw for particle " + std::to_string(i));
    }
  }
  return system;
}

void c_phase_step(ParticleSystem& system, const Model& model, double y) {
  const std::size_t s = system.current_t + 1;
  parallel_for(system.size(), [&](std::size_t i) {
    double d = model.log_cond_density(system.theta_of(i), system.state_of(i), y);
    if (std::isnan(d)) d = kNegInf;
    system.log_weight[i] += d;
    system.log_likelihood[i] += d;
  });
  bool any_finite = false;
  for (double w : system.log_weight) {
    if (w == std::numeric_limits<double>::infinity()) {
      throw NumericalError("log density of +inf at observation " + std::to_string(s) +
                           "; the likelihood must be bounded above");
    }
    any_finite = any_finite || std::isfinite(w);
  }
  if (!any_finite) {
    throw NumericalError("total weight collapse at observation " + std::to_string(s));
  }
  system.current_t = s;
}

double rss(std::span<const double> log_weights) {
  if (log_weights.empty()) throw ContractError("rss of an empty population");
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(m)) throw NumericalError("rss: all weights are zero (collapse)");
  std::vector<double> w(log_weights.size());
  std::vector<double> w2(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - m);
    w2[i] = w[i] * w[i];
  }
  const double s1 = tree_sum(w);
  const double s2 = tree_sum(w2);
  return s1 * s1 / (static_cast<double>(w.size()) * s2);
}

GroupMeans weighted_group_means(std::span<const double> log_weights,
                                std::span<const double> values, std::size_t J, std::size_t N) {
  if (log_weights.size() != J * N || values.size() != J * N) {
    throw ContractError("weighted_group_means: size mismatch");
  }
  GroupMeans out;
  out.group_means.resize(J);
  std::vector<double> w(N);
  std::vector<double> wg(N);
  for (std::size_t j = 0; j < J; ++j) {
    const auto lw = log_weights.subspan(j * N, N);
    const auto g = values.subspan(j * N, N);
    const double m = *std::max_element(lw.begin(), lw.end());
    if (!std::isfinite(m)) {
      throw NumericalError("group " + std::to_string(j) + " has zero total weight");
    }
    for (std::size_t n = 0; n < N; ++n) {
      w[n] = std::exp(lw[n] - m);
      wg[n] = w[n] == 0.0 ? 0.0 : w[n] * g[n];
    }
    out.group_means[j] = tree_sum(wg) / tree_sum(w);
  }
  out.grand_mean = tree_sum(out.group_means) / static_cast<double>(J);
  return out;
}

std::vector<double> evaluate_function(const ParticleSystem& system, const Model& model,
                                      std::size_t index) {
  std::vector<double> values(system.size());
  parallel_for(system.size(), [&](std::size_t i) {
    values[i] = model.evaluate_function(index, system.theta_of(i), system.state_of(i));
  });
  return values;
}

void write_snapshot(std::ostream& out, const ParticleSystem& s) {
  binary::write_bytes(out, kSnapshotMagic);
  for (std::uint64_t v : {s.groups, s.per_group, s.dim, s.state_size, s.current_t, s.cycle}) {
    binary::write_u64(out, v);
  }
  binary::write_f64s(out, s.theta);
  binary::write_f64s(out, s.state);
  binary::write_f64s(out, s.log_weight);
  binary::write_f64s(out, s.log_likelihood);
}

ParticleSystem read_snapshot(std::istream& in) {
  binary::expect_magic(in, kSnapshotMagic);
  const auto J = binary::read_u64(in, "J");
  const auto N = binary::read_u64(in, "N");
  const auto k = binary::read_u64(in, "k");
  const auto ss = binary::read_u64(in, "state_size");
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 32;
  if (J >= kLimit || N >= kLimit || k >= kLimit || ss >= kLimit || J * N >= kLimit) {
    throw SchemaError("snapshot header has implausible dimensions");
  }
  ParticleSystem s(J, N, k, ss);
  s.current_t = binary::read_u64(in, "current_t");
  s.cycle = binary::read_u64(in, "cycle");
  binary::read_f64s(in, s.theta, "theta");
  binary::read_f64s(in, s.state, "state");
  binary::read_f64s(in, s.log_weight, "log_weight");
  binary::read_f64s(in, s.log_likelihood, "log_likelihood");
  return s;
}

}  // namespace spsim
