#include "spsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spsim/error.hpp"
#include "spsim/parallel.hpp"
#include "spsim/reduce.hpp"

namespace spsim {

namespace {

// Sample mean and group-based standard error of exp(log_values) expressed
// relative to their mean, i.e. the delta-method NSE of log(mean). Values are
// rescaled by their maximum first, so nothing overflows whatever the scale:
//   log mean = m + log(abar),  se(log mean) = se(a) / abar,  a_j = exp(L_j - m).
struct LogMeanEstimate {
  double log_mean;
  double log_nse;
  std::vector<double> relative;  // a_j / abar
};

LogMeanEstimate log_mean_with_nse(std::span<const double> log_values) {
  const std::size_t J = log_values.size();
  const double m = *std::max_element(log_values.begin(), log_values.end());
  if (!std::isfinite(m)) throw NumericalError("evidence: all group weights are zero");
  std::vector<double> a(J);
  for (std::size_t j = 0; j < J; ++j) a[j] = std::exp(log_values[j] - m);
  const double abar = tree_sum(a) / static_cast<double>(J);
  LogMeanEstimate out{m + std::log(abar), 0.0, std::vector<double>(J)};
  for (std::size_t j = 0; j < J; ++j) out.relative[j] = a[j] / abar;
  std::vector<double> sq(J);
  for (std::size_t j = 0; j < J; ++j) sq[j] = (out.relative[j] - 1.0) * (out.relative[j] - 1.0);
  out.log_nse = std::sqrt(tree_sum(sq) / (static_cast<double>(J) * static_cast<double>(J - 1)));
  return out;
}

// Cumulative per-group log product of cycle mean weights through date s.
std::vector<double> group_log_products_through(const WeightTrace& trace, std::size_t s) {
  std::vector<double> acc(trace.groups, 0.0);
  for (const auto& cycle : trace.cycles) {
    if (cycle.start_t >= s) break;
    const std::size_t last = std::min(s, cycle.end_t);
    const auto& row = cycle.group_log_mean.at(last - cycle.start_t - 1);
    for (std::size_t j = 0; j < trace.groups; ++j) acc[j] += row[j];
  }
  return acc;
}

}  // namespace

NseEstimate nse_from_group_means(std::span<const double> group_means, std::size_t N) {
  const std::size_t J = group_means.size();
  if (J < 2) throw ContractError("NSE needs at least two groups");
  const double grand = tree_sum(group_means) / static_cast<double>(J);
  std::vector<double> sq(J);
  for (std::size_t j = 0; j < J; ++j) sq[j] = (group_means[j] - grand) * (group_means[j] - grand);
  const double ss = tree_sum(sq);
  const double Jd = static_cast<double>(J);
  return {static_cast<double>(N) / (Jd - 1.0) * ss, std::sqrt(ss / (Jd * (Jd - 1.0)))};
}

double posterior_variance(std::span<const double> log_weights, std::span<const double> values,
                          std::size_t J, std::size_t N, double grand_mean) {
  const double total = static_cast<double>(J * N);
  std::vector<double> group_terms(J);
  std::vector<double> w(N);
  std::vector<double> wd(N);
  for (std::size_t j = 0; j < J; ++j) {
    const auto lw = log_weights.subspan(j * N, N);
    const auto g = values.subspan(j * N, N);
    const double m = *std::max_element(lw.begin(), lw.end());
    if (!std::isfinite(m)) throw NumericalError("group " + std::to_string(j) + " has zero total weight");
    for (std::size_t n = 0; n < N; ++n) {
      w[n] = std::exp(lw[n] - m);
      const double d = g[n] - grand_mean;
      wd[n] = w[n] == 0.0 ? 0.0 : w[n] * d * d;
    }
    group_terms[j] = tree_sum(wd) / tree_sum(w);
  }
  // Equal weights reduce this to sum_{jn} (g - gbar)^2 / (JN - 1).
  return tree_sum(group_terms) * static_cast<double>(N) / (total - 1.0);
}

std::optional<double> rne(std::span<const double> log_weights, std::span<const double> values,
                          std::size_t J, std::size_t N, double vhat) {
  if (!(vhat > 0.0)) return std::nullopt;
  const auto means = weighted_group_means(log_weights, values, J, N);
  return posterior_variance(log_weights, values, J, N, means.grand_mean) / vhat;
}

MomentReport moment_report(std::string name, std::size_t t, std::span<const double> log_weights,
                           std::span<const double> values, std::size_t J, std::size_t N) {
  MomentReport r;
  r.name = std::move(name);
  r.t = t;
  auto means = weighted_group_means(log_weights, values, J, N);
  const auto est = nse_from_group_means(means.group_means, N);
  r.mean = means.grand_mean;
  r.sd = std::sqrt(posterior_variance(log_weights, values, J, N, means.grand_mean));
  r.nse = est.nse;
  r.vhat = est.vhat;
  r.rne = est.vhat > 0.0 ? std::optional<double>(r.sd * r.sd / est.vhat) : std::nullopt;
  r.group_means = std::move(means.group_means);
  return r;
}

std::vector<MomentReport> model_moments(const ParticleSystem& system, const Model& model) {
  std::vector<MomentReport> out;
  const auto fns = model.functions();
  for (std::size_t f = 0; f < fns.size(); ++f) {
    const auto values = evaluate_function(system, model, f);
    out.push_back(moment_report(fns[f].name, system.current_t, system.log_weight, values,
                                system.groups, system.per_group));
  }
  return out;
}

TestRne test_function_rne(const ParticleSystem& system, const Model& model) {
  TestRne out;
  const auto fns = model.functions();
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t f = 0; f < fns.size(); ++f) {
    if (!fns[f].is_test) continue;
    const auto values = evaluate_function(system, model, f);
    const auto means = weighted_group_means(system.log_weight, values, system.groups, system.per_group);
    const auto est = nse_from_group_means(means.group_means, system.per_group);
    const auto value = rne(system.log_weight, values, system.groups, system.per_group, est.vhat);
    out.per_function.push_back(value);
    if (value) {
      sum += *value;
      ++defined;
    }
  }
  if (defined > 0) out.mean = sum / static_cast<double>(defined);
  return out;
}

std::vector<double> group_log_mean_weights(const ParticleSystem& system) {
  std::vector<double> out(system.groups);
  for (std::size_t j = 0; j < system.groups; ++j) out[j] = log_mean_exp(system.group_log_weights(j));
  return out;
}

EvidenceReport evidence_accumulate(const WeightTrace& trace, std::size_t T,
                                   std::optional<std::size_t> burn_in) {
  const std::size_t J = trace.groups;
  if (J < 2) throw ContractError("evidence needs at least two groups");
  if (trace.cycles.empty()) throw DataError("evidence: trace has no cycles");
  std::size_t expected_start = 0;
  for (std::size_t l = 0; l < trace.cycles.size(); ++l) {
    const auto& c = trace.cycles[l];
    if (c.start_t != expected_start || c.end_t <= c.start_t ||
        c.group_log_mean.size() != c.end_t - c.start_t) {
      throw DataError("evidence: cycle " + std::to_string(l + 1) + " is missing or inconsistent");
    }
    for (const auto& row : c.group_log_mean) {
      if (row.size() != J) throw DataError("evidence: wrong group count in cycle " + std::to_string(l + 1));
    }
    expected_start = c.end_t;
  }
  if (expected_start != T) {
    throw DataError("evidence: cycles cover 1.." + std::to_string(expected_start) + " but T = " +
                    std::to_string(T));
  }

  EvidenceReport r;
  r.group_log_products.assign(J, 0.0);
  std::vector<double> cycle_log_means;
  for (const auto& c : trace.cycles) {
    const auto& row = c.group_log_mean.back();
    r.cycle_group_log_means.push_back(row);
    for (std::size_t j = 0; j < J; ++j) r.group_log_products[j] += row[j];
    cycle_log_means.push_back(log_mean_exp(row));
  }
  const auto full = log_mean_with_nse(r.group_log_products);
  r.log_ml = full.log_mean;
  r.log_ml_nse = full.log_nse;
  r.log_ml_tilde = tree_sum(cycle_log_means);

  if (burn_in) {
    if (*burn_in >= T) throw UsageError("burn-in must be smaller than the sample length");
    r.burn_in = burn_in;
    if (*burn_in == 0) {
      r.log_score = r.log_ml;
      r.log_score_nse = r.log_ml_nse;
    } else {
      const auto head = log_mean_with_nse(group_log_products_through(trace, *burn_in));
      // Linearize log(Abar) - log(Bbar) around the group means: z_j = a_j/abar - b_j/bbar.
      std::vector<double> z(J);
      for (std::size_t j = 0; j < J; ++j) z[j] = full.relative[j] - head.relative[j];
      const double zbar = tree_sum(z) / static_cast<double>(J);
      for (double& v : z) v = (v - zbar) * (v - zbar);
      r.log_score = full.log_mean - head.log_mean;
      r.log_score_nse =
          std::sqrt(tree_sum(z) / (static_cast<double>(J) * static_cast<double>(J - 1)));
    }
  }
  return r;
}

PredictiveLikelihood predictive_likelihood(const WeightTrace& trace, std::size_t t, std::size_t s) {
  const auto it = std::find_if(trace.cycles.begin(), trace.cycles.end(),
                               [t](const CycleWeights& c) { return c.start_t == t; });
  if (it == trace.cycles.end() || s <= t || s > it->end_t) {
    throw DataError("predictive likelihood: (" + std::to_string(t) + ", " + std::to_string(s) +
                    ") does not lie within a single recorded cycle");
  }
  const auto est = log_mean_with_nse(it->group_log_mean.at(s - t - 1));
  PredictiveLikelihood out;
  out.log_value = est.log_mean;
  out.log_nse = est.log_nse;
  out.value = std::exp(est.log_mean);
  out.nse = out.value * est.log_nse;
  return out;
}

double pit(const ParticleSystem& system, const Model& model, double y,
           const std::function<double(double)>& transform, std::size_t draws_per_particle,
           std::uint64_t master_seed) {
  if (!model.can_simulate()) throw ContractError("model " + model.id() + " has no simulator for PIT");
  if (draws_per_particle == 0) throw ContractError("PIT needs at least one draw per particle");
  const std::size_t n = system.size();
  const double threshold = transform(y);
  std::vector<double> below(n);
  parallel_for(n, [&](std::size_t i) {
    RandomStream stream({master_seed, static_cast<std::uint32_t>(i / system.per_group),
                         static_cast<std::uint32_t>(i % system.per_group), Phase::aux,
                         static_cast<std::uint32_t>(system.cycle), system.current_t + 1});
    std::size_t count = 0;
    for (std::size_t d = 0; d < draws_per_particle; ++d) {
      if (transform(model.simulate_next(system.theta_of(i), system.state_of(i), stream)) <= threshold) ++count;
    }
    below[i] = static_cast<double>(count) / static_cast<double>(draws_per_particle);
  });
  const double m = *std::max_element(system.log_weight.begin(), system.log_weight.end());
  if (!std::isfinite(m)) throw NumericalError("PIT: all weights are zero");
  std::vector<double> w(n);
  std::vector<double> wb(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(system.log_weight[i] - m);
    wb[i] = w[i] * below[i];
  }
  return tree_sum(wb) / tree_sum(w);
}

}  // namespace spsim
