#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spsim/design_record.hpp"
#include "spsim/diagnostics.hpp"
#include "spsim/model.hpp"
#include "spsim/mutation.hpp"
#include "spsim/particles.hpp"
#include "spsim/resampling.hpp"

namespace spsim {

struct EngineConfig {
  std::size_t J = 16;
  std::size_t N = 512;
  std::uint64_t seed = 1;
  /// Seed of the second (nonadaptive) pass of a hybrid run; derived from
  /// `seed` when absent.
  std::optional<std::uint64_t> replay_seed;
  /// The C phase ends once RSS falls below this value.
  double rss_threshold = 0.5;
  MPhaseRule rule;
  ResampleScheme scheme = ResampleScheme::residual;
  ProposalKind proposal = ProposalKind::random_walk;
  /// Dates where the C phase always ends and S and M phases run (with the
  /// stricter RNE target e2).
  std::vector<std::size_t> forced_dates;
  /// Dates where posterior moments are reported; each is also a forced date.
  std::vector<std::size_t> moment_dates;
  std::optional<std::size_t> burn_in;
  bool compute_pit = false;
  std::size_t pit_draws = 1;

  /// Throws UsageError for out-of-range settings given a sample of length T.
  void validate(std::size_t T) const;
  std::uint64_t effective_replay_seed() const;
};

/// Options that do not affect a replayed design's control flow.
struct ReplayOptions {
  std::optional<std::size_t> burn_in;
  bool compute_pit = false;
  std::size_t pit_draws = 1;
};

struct MIterationTrace {
  std::size_t cycle = 0;
  std::size_t iteration = 0;
  double stepsize = 0.0;
  double acceptance_rate = 0.0;
  std::optional<double> mean_rne;
  std::vector<std::optional<double>> rne;

  friend bool operator==(const MIterationTrace&, const MIterationTrace&) = default;
};

struct CycleSummary {
  std::size_t cycle = 0;
  std::size_t t_end = 0;
  bool forced = false;
  bool selected = false;
  double rss_at_end = 1.0;
  std::size_t sweeps = 0;

  friend bool operator==(const CycleSummary&, const CycleSummary&) = default;
};

/// Wall-clock seconds spent in each phase.
struct PhaseTimings {
  double c_phase = 0.0;
  double s_phase = 0.0;
  double m_phase = 0.0;
};

struct RunTrace {
  /// RSS after each observation, rss[s - 1] for s = 1..T.
  std::vector<double> rss;
  WeightTrace weights;
  std::vector<CycleSummary> cycles;
  std::vector<MIterationTrace> m_iterations;
  /// PIT of each observation when requested, pit[s - 1].
  std::vector<double> pit;
  PhaseTimings timings;
};

struct RunResult {
  ParticleSystem particles;
  DesignRecord design;
  RunTrace trace;
  /// Moments at each requested date (after its M phase) and at T.
  std::vector<MomentReport> moments;
  EvidenceReport evidence;

  std::size_t cycle_count() const { return trace.cycles.size(); }
  std::size_t total_sweeps() const { return trace.m_iterations.size(); }
};

struct HybridResult {
  /// Step 1. Its particles are discarded; diagnostics are kept.
  RunResult adaptive;
  /// Step 2: the nonadaptive replay with a fresh seed.
  RunResult replay;
};

/// Adaptive run: cycle ends and M-phase proposals are chosen from the
/// particles as the run proceeds; all decisions are captured in the design.
RunResult run_adaptive(const Model& model, std::span<const double> data, const EngineConfig& config);

/// Nonadaptive run driven entirely by `design`, drawing fresh particles from
/// `seed`. Throws DataError before any computation if the design does not
/// match the model or data.
RunResult run_nonadaptive(const Model& model, std::span<const double> data, const DesignRecord& design,
                          std::uint64_t seed, const ReplayOptions& options = {});

/// Adaptive pass to learn the design, then a nonadaptive pass with a new seed.
HybridResult run_hybrid(const Model& model, std::span<const double> data, const EngineConfig& config);

}  // namespace spsim
