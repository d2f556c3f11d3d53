#pragma once

#include <span>
#include <string>
#include <vector>

#include "spsim/model.hpp"

namespace spsim::models {

/// y_t | theta ~ N(theta, sigma2) i.i.d., theta ~ N(m0, v0). Posterior and
/// marginal likelihood are available in closed form, so this model serves as
/// the oracle for every accuracy check of the engine.
class ConjugateNormalModel final : public Model {
 public:
  ConjugateNormalModel(double m0 = 0.0, double v0 = 1.0, double sigma2 = 1.0);

  std::string id() const override;
  std::size_t dim() const override { return 1; }
  void sample_prior(RandomStream& stream, std::span<double> theta) const override;
  double log_prior(std::span<const double> theta) const override;
  double log_cond_density(std::span<const double> theta, std::span<double> state,
                          double y) const override;
  std::vector<FunctionInfo> functions() const override;
  double evaluate_function(std::size_t index, std::span<const double> theta,
                           std::span<const double> state) const override;
  bool can_simulate() const override { return true; }
  double simulate_next(std::span<const double> theta, std::span<const double> state,
                       RandomStream& stream) const override;

  double prior_mean() const { return m0_; }
  double prior_variance() const { return v0_; }
  double noise_variance() const { return sigma2_; }

 private:
  double m0_;
  double v0_;
  double sigma2_;
};

struct ConjugateOracle {
  double posterior_mean = 0.0;
  double posterior_variance = 0.0;
  double log_ml = 0.0;
  /// log p(y_t | y_{1:t-1}) for t = 1..T.
  std::vector<double> log_predictive;
};

/// Exact posterior, log marginal likelihood and one-step predictive densities.
ConjugateOracle conjugate_oracle(std::span<const double> data, double m0, double v0, double sigma2);

}  // namespace spsim::models
