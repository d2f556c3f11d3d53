#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spsim/model.hpp"

namespace spsim::models {

/// Natural-scale EGARCH(K, I) parameters.
///
/// Factor triplets (alpha, beta, gamma) and mixture triplets (p, mu, sigma)
/// are stored in a canonical order (sorted by their unconstrained
/// coordinates), so permuting factors or components in theta yields
/// bit-identical parameters and likelihoods.
struct EgarchParams {
  double mu_y = 0.0;
  double sigma_y = 1.0;
  std::vector<double> alpha, beta, gamma;
  std::vector<double> p, mu, sigma;

  // Derived per-component constants: log(p_i / sigma_i) and 1 / (2 sigma_i^2).
  // egarch_transform fills them; call refresh_derived() after editing p or sigma.
  std::vector<double> log_p_over_sigma, inv_two_var;
  void refresh_derived();

  std::size_t factors() const { return alpha.size(); }
  std::size_t components() const { return p.size(); }
};

/// Layout of the unconstrained vector:
/// [theta1, theta2, theta3[K], theta4[K], theta5[K], theta6[I], theta7[I], theta8[I]].
struct EgarchLayout {
  std::size_t K = 1;
  std::size_t I = 1;

  std::size_t dim() const { return 2 + 3 * K + 3 * I; }
  std::size_t theta3(std::size_t k) const { return 2 + k; }
  std::size_t theta4(std::size_t k) const { return 2 + K + k; }
  std::size_t theta5(std::size_t k) const { return 2 + 2 * K + k; }
  std::size_t theta6(std::size_t i) const { return 2 + 3 * K + i; }
  std::size_t theta7(std::size_t i) const { return 2 + 3 * K + I + i; }
  std::size_t theta8(std::size_t i) const { return 2 + 3 * K + 2 * I + i; }
};

/// Lower truncation point of each theta8 (log mixture scale) prior.
inline constexpr double kTheta8Lower = -3.0;

/// Maps unconstrained theta to natural parameters, enforcing a zero-mean,
/// unit-variance innovation mixture.
EgarchParams egarch_transform(std::span<const double> theta, const EgarchLayout& layout);

/// Test functions at date t given the model state after y_t:
/// log volatility, innovation skewness E[eps^3], and P(Y_{t+1} < -0.03).
struct EgarchTestValues {
  double log_volatility = 0.0;
  double skewness = 0.0;
  double loss_probability = 0.0;
};

/// State layout: [v_1..v_K, eps_t]; initial state is all zeros.
class EgarchModel final : public Model {
 public:
  EgarchModel(std::size_t K, std::size_t I);

  std::string id() const override;
  std::size_t dim() const override { return layout_.dim(); }
  std::size_t state_size() const override { return layout_.K + 1; }
  void sample_prior(RandomStream& stream, std::span<double> theta) const override;
  double log_prior(std::span<const double> theta) const override;
  double log_cond_density(std::span<const double> theta, std::span<double> state,
                          double y) const override;
  double log_likelihood(std::span<const double> theta, std::span<const double> ys,
                        std::span<double> state) const override;
  std::vector<FunctionInfo> functions() const override;
  double evaluate_function(std::size_t index, std::span<const double> theta,
                           std::span<const double> state) const override;
  bool can_simulate() const override { return true; }
  double simulate_next(std::span<const double> theta, std::span<const double> state,
                       RandomStream& stream) const override;

  const EgarchLayout& layout() const { return layout_; }
  EgarchTestValues test_values(std::span<const double> theta, std::span<const double> state) const;

  /// Prior means and standard deviations of theta, in layout order.
  const std::vector<double>& prior_means() const { return prior_mean_; }
  const std::vector<double>& prior_sds() const { return prior_sd_; }

 private:
  EgarchLayout layout_;
  std::vector<double> prior_mean_;
  std::vector<double> prior_sd_;
};

/// One step of the recursion on natural parameters: advances `state` over y
/// and returns log p(y | past). Non-finite intermediates give -inf.
double egarch_step(const EgarchParams& params, std::span<double> state, double y);

/// Simulates y_{1:T} forward from v_k0 = 0, eps_0 = 0.
std::vector<double> egarch_simulate(const EgarchParams& params, std::size_t T, RandomStream& stream);

/// Checks sigma_y > 0, |alpha| < 1, beta > 0, p > 0 summing to one,
/// sigma > 0 and the zero-mean, unit-variance mixture normalization.
void validate(const EgarchParams& params);

}  // namespace spsim::models
