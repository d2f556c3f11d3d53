#include "spsim/models/bimodal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spsim/error.hpp"

namespace spsim::models {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

BimodalModel::BimodalModel(double v0, double sigma2) : v0_(v0), sigma2_(sigma2) {
  if (!(v0 > 0.0) || !(sigma2 > 0.0)) throw UsageError("bimodal model needs v0 > 0 and sigma2 > 0");
}

std::string BimodalModel::id() const {
  std::ostringstream s;
  s.precision(17);
  s << "bimodal(v0=" << v0_ << ",sigma2=" << sigma2_ << ")";
  return s.str();
}

void BimodalModel::sample_prior(RandomStream& stream, std::span<double> theta) const {
  theta[0] = std::sqrt(v0_) * stream.normal();
}

double BimodalModel::log_prior(std::span<const double> theta) const {
  return -0.5 * (kLogTwoPi + std::log(v0_) + theta[0] * theta[0] / v0_);
}

double BimodalModel::log_cond_density(std::span<const double> theta, std::span<double>,
                                      double y) const {
  const double a = -(y - theta[0]) * (y - theta[0]) / (2.0 * sigma2_);
  const double b = -(y + theta[0]) * (y + theta[0]) / (2.0 * sigma2_);
  const double m = std::max(a, b);
  return m + std::log(0.5 * std::exp(a - m) + 0.5 * std::exp(b - m)) -
         0.5 * (kLogTwoPi + std::log(sigma2_));
}

std::vector<FunctionInfo> BimodalModel::functions() const {
  return {{"abs_theta", true}, {"theta", false}, {"positive_mode", false}};
}

double BimodalModel::evaluate_function(std::size_t index, std::span<const double> theta,
                                       std::span<const double>) const {
  switch (index) {
    case 0: return std::abs(theta[0]);
    case 1: return theta[0];
    case 2: return theta[0] > 0.0 ? 1.0 : 0.0;
    default: return Model::evaluate_function(index, theta, {});
  }
}

double BimodalModel::simulate_next(std::span<const double> theta, std::span<const double>,
                                   RandomStream& stream) const {
  const double sign = stream.uniform() < 0.5 ? 1.0 : -1.0;
  return sign * theta[0] + std::sqrt(sigma2_) * stream.normal();
}

}  // namespace spsim::models
