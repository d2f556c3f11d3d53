#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spsim/model.hpp"

namespace spsim::models {

/// Model selection by name plus hyperparameters, as given on the command line.
struct ModelOptions {
  std::string name = "conjugate";  // conjugate | egarch | bimodal
  std::size_t K = 1;
  std::size_t I = 1;
  double m0 = 0.0;
  double v0 = 1.0;
  double sigma2 = 1.0;
};

std::unique_ptr<Model> make_model(const ModelOptions& options);

/// Simulates a series from the named model at a fixed parameter vector
/// (unconstrained scale). Without theta, the prior mean is used.
std::vector<double> simulate_series(const ModelOptions& options, std::size_t T, std::uint64_t seed,
                                    const std::optional<std::vector<double>>& theta = std::nullopt);

}  // namespace spsim::models
