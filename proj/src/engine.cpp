#include "spsim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>

#include "spsim/error.hpp"
#include "spsim/rng.hpp"

namespace spsim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_data(std::span<const double> data) {
  if (data.empty()) throw DataError("the data series is empty");
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (!std::isfinite(data[t])) throw DataError("observation " + std::to_string(t + 1) + " is not finite");
  }
}

struct RunSettings {
  std::size_t J = 0;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  double rss_threshold = 0.5;
  MPhaseRule rule;
  ResampleScheme scheme = ResampleScheme::residual;
  ProposalKind proposal = ProposalKind::random_walk;
  std::set<std::size_t> forced;
  std::set<std::size_t> moment;
  std::optional<std::size_t> burn_in;
  bool compute_pit = false;
  std::size_t pit_draws = 1;
};

// Shared cycle loop. With `fixed` set, every decision comes from the design;
// otherwise decisions are made adaptively and recorded into result.design.
RunResult execute(const Model& model, std::span<const double> data, const RunSettings& cfg,
                  const DesignRecord* fixed) {
  const std::size_t T = data.size();
  RunResult result;
  auto& trace = result.trace;
  trace.weights.groups = cfg.J;
  trace.weights.per_group = cfg.N;

  auto start = Clock::now();
  ParticleSystem system = init_particles(model, cfg.J, cfg.N, cfg.seed);
  trace.timings.c_phase += seconds_since(start);

  StepsizeState stepsize;
  std::vector<DesignCycle> design_cycles;
  bool moments_at_T = false;

  while (system.current_t < T) {
    const std::size_t cycle = system.cycle + 1;
    system.cycle = cycle;
    const DesignCycle* planned = fixed ? &fixed->cycles.at(cycle - 1) : nullptr;

    // C phase.
    start = Clock::now();
    CycleWeights weights;
    weights.start_t = system.current_t;
    double current_rss = 1.0;
    while (true) {
      const double y = data[system.current_t];
      if (cfg.compute_pit) {
        trace.pit.push_back(pit(system, model, y, [](double v) { return v; }, cfg.pit_draws, cfg.seed));
      }
      c_phase_step(system, model, y);
      current_rss = rss(system);
      trace.rss.push_back(current_rss);
      weights.group_log_mean.push_back(group_log_mean_weights(system));
      const std::size_t t = system.current_t;
      if (planned) {
        if (t == planned->t_end) break;
      } else if (t == T || cfg.forced.contains(t) || current_rss < cfg.rss_threshold) {
        break;
      }
    }
    const std::size_t t_end = system.current_t;
    weights.end_t = t_end;
    trace.weights.cycles.push_back(std::move(weights));
    trace.timings.c_phase += seconds_since(start);

    DesignCycle decided;
    decided.t_end = t_end;
    decided.forced = planned ? planned->forced : cfg.forced.contains(t_end);
    decided.selected = planned ? planned->selected : (decided.forced || current_rss < cfg.rss_threshold);
    decided.mutation.cycle = cycle;

    if (decided.selected) {
      start = Clock::now();
      s_phase(system, cfg.scheme, cfg.seed);
      trace.timings.s_phase += seconds_since(start);

      start = Clock::now();
      const auto observed = data.first(t_end);
      decided.mutation = planned ? m_phase_replay(system, model, observed, planned->mutation, cfg.seed)
                                 : m_phase(system, model, observed, cfg.rule, current_rss, decided.forced,
                                           stepsize, cfg.proposal, cfg.seed);
      trace.timings.m_phase += seconds_since(start);
    }

    for (std::size_t r = 0; r < decided.mutation.iterations.size(); ++r) {
      const auto& it = decided.mutation.iterations[r];
      trace.m_iterations.push_back(
          {cycle, r + 1, it.stepsize, it.acceptance_rate, it.rne.mean, it.rne.per_function});
    }
    trace.cycles.push_back({cycle, t_end, decided.forced, decided.selected, current_rss,
                            decided.mutation.sweeps()});

    if (cfg.moment.contains(t_end)) {
      auto reports = model_moments(system, model);
      result.moments.insert(result.moments.end(), reports.begin(), reports.end());
      moments_at_T = moments_at_T || t_end == T;
    }
    design_cycles.push_back(std::move(decided));
  }

  if (!moments_at_T) {
    auto reports = model_moments(system, model);
    result.moments.insert(result.moments.end(), reports.begin(), reports.end());
  }

  if (fixed) {
    // The replay must have executed exactly the planned (t_l, R_l) sequence.
    if (design_cycles.size() != fixed->cycles.size()) throw NumericalError("replay diverged from its design");
    for (std::size_t l = 0; l < design_cycles.size(); ++l) {
      if (design_cycles[l].t_end != fixed->cycles[l].t_end ||
          design_cycles[l].mutation.sweeps() != fixed->cycles[l].mutation.sweeps()) {
        throw NumericalError("replay diverged from its design at cycle " + std::to_string(l + 1));
      }
    }
    result.design = *fixed;
  } else {
    auto& d = result.design;
    d.model_id = model.id();
    d.J = cfg.J;
    d.N = cfg.N;
    d.k = model.dim();
    d.T = T;
    d.config_hash = config_hash(d.model_id, d.J, d.N, d.k, data, cfg.scheme, cfg.proposal);
    d.adaptive_seed = cfg.seed;
    d.scheme = cfg.scheme;
    d.proposal = cfg.proposal;
    d.forced_dates.assign(cfg.forced.begin(), cfg.forced.end());
    d.moment_dates.assign(cfg.moment.begin(), cfg.moment.end());
    d.cycles = std::move(design_cycles);
  }

  result.evidence = evidence_accumulate(trace.weights, T, cfg.burn_in);
  result.particles = std::move(system);
  return result;
}

}  // namespace

void EngineConfig::validate(std::size_t T) const {
  if (J < 2) throw UsageError("J must be at least 2 (NSE needs two groups)");
  if (N < 2) throw UsageError("N must be at least 2");
  if (!(rss_threshold > 0.0 && rss_threshold < 1.0)) throw UsageError("RSS threshold must lie in (0, 1)");
  rule.validate();
  for (const auto* dates : {&forced_dates, &moment_dates}) {
    for (std::size_t t : *dates) {
      if (t < 1 || t > T) throw UsageError("date " + std::to_string(t) + " is outside 1.." + std::to_string(T));
    }
  }
  if (burn_in && *burn_in >= T) throw UsageError("burn-in must be smaller than the sample length");
  if (pit_draws < 1) throw UsageError("PIT needs at least one draw per particle");
}

std::uint64_t EngineConfig::effective_replay_seed() const {
  return replay_seed ? *replay_seed : mix64(seed ^ 0x68796272696473ull);
}

RunResult run_adaptive(const Model& model, std::span<const double> data, const EngineConfig& config) {
  check_data(data);
  config.validate(data.size());
  RunSettings s;
  s.J = config.J;
  s.N = config.N;
  s.seed = config.seed;
  s.rss_threshold = config.rss_threshold;
  s.rule = config.rule;
  s.scheme = config.scheme;
  s.proposal = config.proposal;
  s.forced.insert(config.forced_dates.begin(), config.forced_dates.end());
  s.forced.insert(config.moment_dates.begin(), config.moment_dates.end());
  s.moment.insert(config.moment_dates.begin(), config.moment_dates.end());
  s.burn_in = config.burn_in;
  s.compute_pit = config.compute_pit;
  s.pit_draws = config.pit_draws;
  auto result = execute(model, data, s, nullptr);
  result.design.replay_seed = config.effective_replay_seed();
  return result;
}

RunResult run_nonadaptive(const Model& model, std::span<const double> data, const DesignRecord& design,
                          std::uint64_t seed, const ReplayOptions& options) {
  check_data(data);
  design.validate();
  if (design.model_id != model.id()) {
    throw DataError("design was made for model " + design.model_id + ", not " + model.id());
  }
  if (design.T != data.size()) {
    throw DataError("design covers " + std::to_string(design.T) + " observations but the data has " +
                    std::to_string(data.size()));
  }
  if (design.k != model.dim()) throw DataError("design parameter dimension does not match the model");
  if (design.config_hash !=
      config_hash(model.id(), design.J, design.N, design.k, data, design.scheme, design.proposal)) {
    throw DataError("design config hash does not match this model and data");
  }
  if (options.burn_in && *options.burn_in >= data.size()) {
    throw UsageError("burn-in must be smaller than the sample length");
  }
  RunSettings s;
  s.J = design.J;
  s.N = design.N;
  s.seed = seed;
  s.scheme = design.scheme;
  s.proposal = design.proposal;
  s.forced.insert(design.forced_dates.begin(), design.forced_dates.end());
  s.moment.insert(design.moment_dates.begin(), design.moment_dates.end());
  s.burn_in = options.burn_in;
  s.compute_pit = options.compute_pit;
  s.pit_draws = options.pit_draws;
  return execute(model, data, s, &design);
}

HybridResult run_hybrid(const Model& model, std::span<const double> data, const EngineConfig& config) {
  HybridResult out;
  out.adaptive = run_adaptive(model, data, config);
  out.adaptive.particles = ParticleSystem{};
  out.replay = run_nonadaptive(model, data, out.adaptive.design, out.adaptive.design.replay_seed,
                               {config.burn_in, config.compute_pit, config.pit_draws});
  return out;
}

}  // namespace spsim
