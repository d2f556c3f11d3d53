#include "spsim/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spsim/error.hpp"
#include "spsim/parallel.hpp"
#include "spsim/reduce.hpp"

namespace spsim {

std::string_view to_string(ResampleScheme scheme) {
  switch (scheme) {
    case ResampleScheme::multinomial: return "multinomial";
    case ResampleScheme::residual: return "residual";
    case ResampleScheme::stratified: return "stratified";
    case ResampleScheme::systematic: return "systematic";
  }
  return "unknown";
}

ResampleScheme parse_resample_scheme(std::string_view name) {
  for (auto s : {ResampleScheme::multinomial, ResampleScheme::residual, ResampleScheme::stratified,
                 ResampleScheme::systematic}) {
    if (name == to_string(s)) return s;
  }
  throw UsageError("unknown resampling scheme '" + std::string(name) + "'");
}

namespace {

std::vector<double> cumulative(std::span<const double> w) {
  std::vector<double> cum(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) cum[i] = acc += w[i];
  return cum;
}

// Smallest i with cum[i] > u, so zero-weight entries are never selected.
// Falls back to the last positive-weight entry when rounding pushes u past the end.
std::size_t locate(const std::vector<double>& cum, double u, std::size_t last_positive) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) return last_positive;
  return static_cast<std::size_t>(it - cum.begin());
}

void multinomial_draws(std::span<const double> w, std::size_t draws, RandomStream& stream,
                       std::vector<std::size_t>& out) {
  const auto cum = cumulative(w);
  const double total = cum.back();
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) last_positive = i;
  }
  for (std::size_t d = 0; d < draws; ++d) out.push_back(locate(cum, stream.uniform() * total, last_positive));
}

}  // namespace

std::vector<std::size_t> resample_group(std::span<const double> weights, ResampleScheme scheme,
                                        RandomStream& stream) {
  const std::size_t n = weights.size();
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("resample_group: weights must be finite and nonnegative");
  }
  const double total = tree_sum(weights);
  if (!(total > 0.0)) throw ContractError("resample_group: total weight must be positive");

  std::vector<std::size_t> ancestors;
  ancestors.reserve(n);
  const double scale = static_cast<double>(n) / total;

  switch (scheme) {
    case ResampleScheme::multinomial:
      multinomial_draws(weights, n, stream, ancestors);
      break;
    case ResampleScheme::residual: {
      std::vector<double> residual(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double expected = weights[i] * scale;
        const double copies = std::floor(expected);
        residual[i] = expected - copies;
        ancestors.insert(ancestors.end(), static_cast<std::size_t>(copies), i);
      }
      if (ancestors.size() > n) ancestors.resize(n);
      const std::size_t remaining = n - ancestors.size();
      if (remaining > 0) {
        if (tree_sum(residual) > 0.0) {
          multinomial_draws(residual, remaining, stream, ancestors);
        } else {
          multinomial_draws(weights, remaining, stream, ancestors);
        }
      }
      break;
    }
    case ResampleScheme::stratified:
    case ResampleScheme::systematic: {
      const auto cum = cumulative(weights);
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] > 0.0) last_positive = i;
      }
      const double offset = stream.uniform();
      for (std::size_t i = 0; i < n; ++i) {
        const double u = scheme == ResampleScheme::systematic ? offset : stream.uniform();
        const double point = (static_cast<double>(i) + u) / static_cast<double>(n) * cum.back();
        ancestors.push_back(locate(cum, point, last_positive));
      }
      break;
    }
  }
  std::sort(ancestors.begin(), ancestors.end());
  return ancestors;
}

void s_phase(ParticleSystem& system, ResampleScheme scheme, std::uint64_t master_seed) {
  const std::size_t J = system.groups;
  const std::size_t N = system.per_group;
  const std::size_t k = system.dim;
  const std::size_t ss = system.state_size;

  std::vector<std::vector<std::size_t>> ancestry(J);
  parallel_for(J, [&](std::size_t j) {
    const auto lw = system.group_log_weights(j);
    const double m = *std::max_element(lw.begin(), lw.end());
    if (!std::isfinite(m)) {
      throw NumericalError("S phase: group " + std::to_string(j) + " has zero total weight");
    }
    std::vector<double> w(N);
    for (std::size_t n = 0; n < N; ++n) w[n] = std::exp(lw[n] - m);
    RandomStream stream({master_seed, static_cast<std::uint32_t>(j), 0, Phase::S,
                         static_cast<std::uint32_t>(system.cycle), 0});
    ancestry[j] = resample_group(w, scheme, stream);
  });

  const ParticleSystem source = system;
  parallel_for(system.size(), [&](std::size_t i) {
    const std::size_t j = i / N;
    const std::size_t from = j * N + ancestry[j][i % N];
    std::copy_n(source.theta.begin() + from * k, k, system.theta.begin() + i * k);
    std::copy_n(source.state.begin() + from * ss, ss, system.state.begin() + i * ss);
    system.log_likelihood[i] = source.log_likelihood[from];
    system.log_weight[i] = 0.0;
  });
}

}  // namespace spsim
