#include "spsim/models/conjugate_normal.hpp"

#include <cmath>
#include <sstream>

#include "spsim/error.hpp"

namespace spsim::models {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;

double log_normal_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance) + d * d / variance);
}
}  // namespace

ConjugateNormalModel::ConjugateNormalModel(double m0, double v0, double sigma2)
    : m0_(m0), v0_(v0), sigma2_(sigma2) {
  if (!(v0 > 0.0) || !(sigma2 > 0.0)) throw UsageError("conjugate model needs v0 > 0 and sigma2 > 0");
}

std::string ConjugateNormalModel::id() const {
  std::ostringstream s;
  s.precision(17);
  s << "conjugate(m0=" << m0_ << ",v0=" << v0_ << ",sigma2=" << sigma2_ << ")";
  return s.str();
}

void ConjugateNormalModel::sample_prior(RandomStream& stream, std::span<double> theta) const {
  theta[0] = m0_ + std::sqrt(v0_) * stream.normal();
}

double ConjugateNormalModel::log_prior(std::span<const double> theta) const {
  return log_normal_density(theta[0], m0_, v0_);
}

double ConjugateNormalModel::log_cond_density(std::span<const double> theta, std::span<double>,
                                              double y) const {
  return log_normal_density(y, theta[0], sigma2_);
}

std::vector<FunctionInfo> ConjugateNormalModel::functions() const {
  return {{"theta", true}, {"theta_squared", false}};
}

double ConjugateNormalModel::evaluate_function(std::size_t index, std::span<const double> theta,
                                               std::span<const double>) const {
  switch (index) {
    case 0: return theta[0];
    case 1: return theta[0] * theta[0];
    default: return Model::evaluate_function(index, theta, {});
  }
}

double ConjugateNormalModel::simulate_next(std::span<const double> theta, std::span<const double>,
                                           RandomStream& stream) const {
  return theta[0] + std::sqrt(sigma2_) * stream.normal();
}

ConjugateOracle conjugate_oracle(std::span<const double> data, double m0, double v0, double sigma2) {
  if (!(v0 > 0.0) || !(sigma2 > 0.0)) throw UsageError("conjugate oracle needs v0 > 0 and sigma2 > 0");
  ConjugateOracle out;
  double mean = m0;
  double var = v0;
  for (double y : data) {
    const double lp = log_normal_density(y, mean, var + sigma2);
    out.log_predictive.push_back(lp);
    out.log_ml += lp;
    const double precision = 1.0 / var + 1.0 / sigma2;
    mean = (mean / var + y / sigma2) / precision;
    var = 1.0 / precision;
  }
  out.posterior_mean = mean;
  out.posterior_variance = var;
  return out;
}

}  // namespace spsim::models
