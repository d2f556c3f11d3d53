#include "spsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spsim/error.hpp"

namespace spsim {

void Model::init_state(std::span<double> state) const { std::fill(state.begin(), state.end(), 0.0); }

double Model::log_likelihood(std::span<const double> theta, std::span<const double> ys,
                             std::span<double> state) const {
  init_state(state);
  double total = 0.0;
  for (double y : ys) {
    const double d = log_cond_density(theta, state, y);
    if (!(d > -std::numeric_limits<double>::infinity())) {
      return -std::numeric_limits<double>::infinity();
    }
    total += d;
  }
  return total;
}

double Model::evaluate_function(std::size_t index, std::span<const double>,
                                std::span<const double>) const {
  throw ContractError("model " + id() + " has no function " + std::to_string(index));
}

double Model::simulate_next(std::span<const double>, std::span<const double>, RandomStream&) const {
  throw ContractError("model " + id() + " does not provide a simulator");
}

}  // namespace spsim
