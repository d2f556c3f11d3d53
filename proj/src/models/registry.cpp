#include "spsim/models/registry.hpp"

#include "spsim/error.hpp"
#include "spsim/models/bimodal.hpp"
#include "spsim/models/conjugate_normal.hpp"
#include "spsim/models/egarch.hpp"

namespace spsim::models {

std::unique_ptr<Model> make_model(const ModelOptions& o) {
  if (o.name == "conjugate") return std::make_unique<ConjugateNormalModel>(o.m0, o.v0, o.sigma2);
  if (o.name == "bimodal") return std::make_unique<BimodalModel>(o.v0, o.sigma2);
  if (o.name == "egarch") return std::make_unique<EgarchModel>(o.K, o.I);
  throw UsageError("unknown model '" + o.name + "' (conjugate|egarch|bimodal)");
}

std::vector<double> simulate_series(const ModelOptions& o, std::size_t T, std::uint64_t seed,
                                    const std::optional<std::vector<double>>& theta) {
  if (T == 0) throw UsageError("simulate: T must be positive");
  const auto model = make_model(o);
  std::vector<double> point;
  if (theta) {
    point = *theta;
  } else if (const auto* egarch = dynamic_cast<const EgarchModel*>(model.get())) {
    point = egarch->prior_means();
  } else if (o.name == "conjugate") {
    point = {o.m0};
  } else {
    point = {1.0};
  }
  if (point.size() != model->dim()) {
    throw UsageError("simulate: theta needs " + std::to_string(model->dim()) + " values");
  }
  RandomStream stream({seed, 0, 0, Phase::aux, 0, 0});
  if (const auto* egarch = dynamic_cast<const EgarchModel*>(model.get())) {
    return egarch_simulate(egarch_transform(point, egarch->layout()), T, stream);
  }
  std::vector<double> state(model->state_size());
  model->init_state(state);
  std::vector<double> ys;
  ys.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double y = model->simulate_next(point, state, stream);
    model->log_cond_density(point, state, y);
    ys.push_back(y);
  }
  return ys;
}

}  // namespace spsim::models
