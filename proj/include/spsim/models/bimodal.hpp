#pragma once

#include <span>
#include <string>
#include <vector>

#include "spsim/model.hpp"

namespace spsim::models {

/// Symmetric two-component location mixture:
/// y_t | theta ~ 0.5 N(theta, sigma2) + 0.5 N(-theta, sigma2), theta ~ N(0, v0).
/// The likelihood is invariant under theta -> -theta, so the posterior has two
/// mirror-image modes of equal mass, one on each side of zero.
class BimodalModel final : public Model {
 public:
  explicit BimodalModel(double v0 = 4.0, double sigma2 = 1.0);

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

 private:
  double v0_;
  double sigma2_;
};

}  // namespace spsim::models
