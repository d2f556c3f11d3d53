#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spsim/model.hpp"
#include "spsim/particles.hpp"

namespace spsim {

/// Group-based simulation variance: vhat approximates the asymptotic variance
/// v (scaled by JN), nse is the standard error of the grand mean.
struct NseEstimate {
  double vhat = 0.0;
  double nse = 0.0;
};

/// vhat = N/(J-1) * sum_j (gbar_j - gbar)^2,  nse = sqrt(vhat / (J N)).
NseEstimate nse_from_group_means(std::span<const double> group_means, std::size_t N);

/// Posterior variance estimate centred at the grand mean with the (JN - 1)
/// denominator. Weighted populations use group-normalized weights, each group
/// contributing 1/J.
double posterior_variance(std::span<const double> log_weights, std::span<const double> values,
                          std::size_t J, std::size_t N, double grand_mean);

/// Relative numerical efficiency var / vhat; empty when vhat == 0 (the
/// function is constant across groups and RNE is undefined).
std::optional<double> rne(std::span<const double> log_weights, std::span<const double> values,
                          std::size_t J, std::size_t N, double vhat);

struct MomentReport {
  std::string name;
  std::size_t t = 0;
  double mean = 0.0;
  double sd = 0.0;
  double nse = 0.0;
  double vhat = 0.0;
  std::optional<double> rne;
  std::vector<double> group_means;

  friend bool operator==(const MomentReport&, const MomentReport&) = default;
};

MomentReport moment_report(std::string name, std::size_t t, std::span<const double> log_weights,
                           std::span<const double> values, std::size_t J, std::size_t N);

/// Moment reports for every function the model exposes, at system.current_t.
std::vector<MomentReport> model_moments(const ParticleSystem& system, const Model& model);

/// RNE of each test function on the current population and their arithmetic
/// mean over the defined ones (empty if none is defined).
struct TestRne {
  std::vector<std::optional<double>> per_function;
  std::optional<double> mean;
};
TestRne test_function_rne(const ParticleSystem& system, const Model& model);

/// C-phase weight history of one cycle. group_log_mean[s - start_t - 1][j] is
/// log of group j's mean weight w_jn(s), with weights restarted at 1 at start_t.
struct CycleWeights {
  std::size_t start_t = 0;
  std::size_t end_t = 0;
  std::vector<std::vector<double>> group_log_mean;

  friend bool operator==(const CycleWeights&, const CycleWeights&) = default;
};

struct WeightTrace {
  std::size_t groups = 0;
  std::size_t per_group = 0;
  std::vector<CycleWeights> cycles;

  friend bool operator==(const WeightTrace&, const WeightTrace&) = default;
};

/// Log-group-mean of the current C-phase weights, one entry per group.
std::vector<double> group_log_mean_weights(const ParticleSystem& system);

struct EvidenceReport {
  /// log wbar_j(l-1), one row per cycle.
  std::vector<std::vector<double>> cycle_group_log_means;
  /// log wbar_j = sum over cycles, one per group.
  std::vector<double> group_log_products;
  double log_ml = 0.0;        // log wbar^(J,N)
  double log_ml_tilde = 0.0;  // log wtilde^(J,N)
  double log_ml_nse = 0.0;
  std::optional<std::size_t> burn_in;
  std::optional<double> log_score;
  std::optional<double> log_score_nse;

  friend bool operator==(const EvidenceReport&, const EvidenceReport&) = default;
};

/// Marginal likelihood (both estimators) with delta-method NSE, and the log
/// score log p(y_{burn_in+1:T} | y_{1:burn_in}) when burn_in is given.
/// T is the sample length the trace must cover.
EvidenceReport evidence_accumulate(const WeightTrace& trace, std::size_t T,
                                   std::optional<std::size_t> burn_in = std::nullopt);

struct PredictiveLikelihood {
  double value = 0.0;
  double nse = 0.0;
  double log_value = 0.0;
  double log_nse = 0.0;
};

/// p(y_{t+1:s} | y_{1:t}) from the C-phase weights of the cycle starting at t.
PredictiveLikelihood predictive_likelihood(const WeightTrace& trace, std::size_t t, std::size_t s);

/// Weighted probability integral transform of y under the one-step-ahead
/// predictive: fraction of simulated F(Y) at or below F(y), weighting each
/// particle by its current C-phase weight. Uses aux streams keyed by
/// (group, particle, cycle, current_t + 1).
double pit(const ParticleSystem& system, const Model& model, double y,
           const std::function<double(double)>& transform, std::size_t draws_per_particle,
           std::uint64_t master_seed);

}  // namespace spsim
