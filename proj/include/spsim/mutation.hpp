#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spsim/diagnostics.hpp"
#include "spsim/model.hpp"
#include "spsim/particles.hpp"

namespace spsim {

inline constexpr double kTargetAcceptance = 0.25;
inline constexpr double kStepsizeIncrement = 0.1;
inline constexpr double kMinStepsize = 0.1;
inline constexpr double kMaxStepsize = 1.0;
inline constexpr double kInitialStepsize = 0.5;

/// Random-walk scaling factor h, always within [0.1, 1.0].
struct StepsizeState {
  double h = kInitialStepsize;
};

/// h + 0.1 if the acceptance rate exceeds 0.25, h - 0.1 otherwise, clamped.
StepsizeState adapt_stepsize(StepsizeState state, double acceptance_rate);

enum class MPhaseRuleKind : std::uint8_t { deterministic = 0, rne_based = 1 };

std::string_view to_string(MPhaseRuleKind kind);
MPhaseRuleKind parse_mphase_rule(std::string_view name);

struct MPhaseRule {
  MPhaseRuleKind kind = MPhaseRuleKind::deterministic;
  // Deterministic rule: kappa * rbar sweeps if RSS < d2, else rbar.
  std::size_t rbar = 7;
  std::size_t kappa = 3;
  double d1 = 0.50;
  double d2 = 0.20;
  // RNE rule: sweep until the mean test-function RNE reaches e1 (e2 at
  // forced dates), at most rmax sweeps.
  double e1 = 0.35;
  double e2 = 0.90;
  std::size_t rmax = 100;

  /// Throws UsageError when a constant is out of range.
  void validate() const;
  /// Number of sweeps the deterministic rule runs for a given RSS at entry.
  std::size_t deterministic_sweeps(double rss_at_entry) const;

  friend bool operator==(const MPhaseRule&, const MPhaseRule&) = default;
};

/// Gaussian random walk (default) or the experimental independence sampler.
enum class ProposalKind : std::uint8_t { random_walk = 0, independence = 1 };

std::string_view to_string(ProposalKind kind);
ProposalKind parse_proposal_kind(std::string_view name);

/// Everything that defines one Metropolis sweep's proposal.
struct Proposal {
  ProposalKind kind = ProposalKind::random_walk;
  Eigen::MatrixXd covariance;
  /// Centre of the independence proposal; empty for the random walk.
  Eigen::VectorXd mean;
};

struct MutationIteration {
  Proposal proposal;
  double stepsize = kInitialStepsize;
  double acceptance_rate = 0.0;
  TestRne rne;
};

/// The M-phase decisions of one cycle; replaying the proposals reproduces it.
struct MutationRecord {
  std::size_t cycle = 0;
  std::vector<MutationIteration> iterations;

  std::size_t sweeps() const { return iterations.size(); }
};

/// Sample covariance of all JN particles (JN - 1 denominator).
Eigen::MatrixXd sample_covariance(const ParticleSystem& system);
Eigen::VectorXd sample_mean(const ParticleSystem& system);

/// h^2 (V + j I) where V is the population sample covariance and
/// j = 1e-10 * trace(V) / k (1e-10 when V is zero).
Eigen::MatrixXd proposal_covariance(const ParticleSystem& system, double h);

/// Square-root factor L with L L^T = sigma. Falls back to an eigenvalue
/// factor (negative eigenvalues clipped) when Cholesky fails.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma);

/// One Metropolis update of every particle, targeting the posterior given
/// `data` = y_{1:current_t}. Proposals are scored by a full likelihood scan.
/// Returns the population acceptance fraction.
double metropolis_sweep(ParticleSystem& system, const Model& model, std::span<const double> data,
                        const Proposal& proposal, std::uint64_t master_seed, std::size_t iteration);

/// Adaptive M phase: builds proposals from the current population, sweeps
/// until the rule stops it, and adapts the stepsize after every sweep.
MutationRecord m_phase(ParticleSystem& system, const Model& model, std::span<const double> data,
                       const MPhaseRule& rule, double rss_at_entry, bool forced_date,
                       StepsizeState& stepsize, ProposalKind proposal_kind,
                       std::uint64_t master_seed);

/// Nonadaptive M phase: replays the recorded proposals exactly, one sweep
/// each. The returned record carries this run's acceptance rates and RNEs.
MutationRecord m_phase_replay(ParticleSystem& system, const Model& model,
                              std::span<const double> data, const MutationRecord& design,
                              std::uint64_t master_seed);

}  // namespace spsim
