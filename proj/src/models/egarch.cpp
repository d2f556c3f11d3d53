#include "spsim/models/egarch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "spsim/error.hpp"

namespace spsim::models {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;
const double kMeanAbsNormal = std::sqrt(2.0 / std::numbers::pi);
constexpr double kLossThreshold = -0.03;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * (kLogTwoPi + z * z) - std::log(sd);
}

// Indices of triplets sorted lexicographically by their theta coordinates.
template <typename Key>
std::vector<std::size_t> canonical_order(std::size_t count, Key key) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return order;
}

// Volatility factors one step ahead of `state`.
double next_log_scale(const EgarchParams& par, std::span<const double> state, std::span<double> v_next) {
  const std::size_t K = par.factors();
  const double eps = state[K];
  const double shock = std::abs(eps) - kMeanAbsNormal;
  double sum_v = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    v_next[k] = par.alpha[k] * state[k] + par.beta[k] * shock + par.gamma[k] * eps;
    sum_v += v_next[k];
  }
  return std::log(par.sigma_y) + 0.5 * sum_v;
}

}  // namespace

void EgarchParams::refresh_derived() {
  const std::size_t I = p.size();
  log_p_over_sigma.resize(I);
  inv_two_var.resize(I);
  for (std::size_t i = 0; i < I; ++i) {
    log_p_over_sigma[i] = std::log(p[i]) - std::log(sigma[i]);
    inv_two_var[i] = 1.0 / (2.0 * sigma[i] * sigma[i]);
  }
}

EgarchParams egarch_transform(std::span<const double> theta, const EgarchLayout& L) {
  if (theta.size() != L.dim()) throw ContractError("egarch_transform: theta has the wrong length");
  EgarchParams par;
  par.mu_y = theta[0] / 1000.0;
  par.sigma_y = std::exp(theta[1]);

  const auto factor_order = canonical_order(L.K, [&](std::size_t k) {
    return std::array{theta[L.theta3(k)], theta[L.theta4(k)], theta[L.theta5(k)]};
  });
  for (std::size_t k : factor_order) {
    par.alpha.push_back(std::tanh(theta[L.theta3(k)]));
    par.beta.push_back(std::exp(theta[L.theta4(k)]));
    par.gamma.push_back(theta[L.theta5(k)]);
  }

  const auto comp_order = canonical_order(L.I, [&](std::size_t i) {
    return std::array{theta[L.theta6(i)], theta[L.theta7(i)], theta[L.theta8(i)]};
  });
  std::vector<double> p_star, mu_star, sigma_star;
  for (std::size_t i : comp_order) {
    p_star.push_back(std::tanh(theta[L.theta6(i)]) + 1.0);
    mu_star.push_back(theta[L.theta7(i)]);
    sigma_star.push_back(std::exp(theta[L.theta8(i)]));
  }
  double p_total = 0.0;
  for (double v : p_star) p_total += v;
  par.p.resize(L.I);
  double mean_star = 0.0;
  for (std::size_t i = 0; i < L.I; ++i) {
    par.p[i] = p_star[i] / p_total;
    mean_star += par.p[i] * mu_star[i];
  }
  std::vector<double> mu_centred(L.I);
  double second_moment = 0.0;
  for (std::size_t i = 0; i < L.I; ++i) {
    mu_centred[i] = mu_star[i] - mean_star;
    second_moment += par.p[i] * (mu_centred[i] * mu_centred[i] + sigma_star[i] * sigma_star[i]);
  }
  const double c = 1.0 / std::sqrt(second_moment);
  par.mu.resize(L.I);
  par.sigma.resize(L.I);
  for (std::size_t i = 0; i < L.I; ++i) {
    par.mu[i] = c * mu_centred[i];
    par.sigma[i] = c * sigma_star[i];
  }
  par.refresh_derived();
  return par;
}

void validate(const EgarchParams& par) {
  constexpr double kTol = 1e-10;
  const auto fail = [](const std::string& what) { throw UsageError("invalid EGARCH parameters: " + what); };
  if (!(par.sigma_y > 0.0)) fail("sigma_y must be positive");
  if (par.alpha.size() != par.beta.size() || par.alpha.size() != par.gamma.size() || par.alpha.empty()) {
    fail("factor arrays must be non-empty and of equal length");
  }
  if (par.p.size() != par.mu.size() || par.p.size() != par.sigma.size() || par.p.empty()) {
    fail("mixture arrays must be non-empty and of equal length");
  }
  for (std::size_t k = 0; k < par.factors(); ++k) {
    if (!(std::abs(par.alpha[k]) < 1.0)) fail("alpha must lie in (-1, 1)");
    if (!(par.beta[k] >= 0.0)) fail("beta must be nonnegative");
  }
  double total = 0.0, mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < par.components(); ++i) {
    if (!(par.p[i] > 0.0) || !(par.sigma[i] > 0.0)) fail("mixture weights and scales must be positive");
    total += par.p[i];
    mean += par.p[i] * par.mu[i];
    second += par.p[i] * (par.mu[i] * par.mu[i] + par.sigma[i] * par.sigma[i]);
  }
  if (std::abs(total - 1.0) > kTol) fail("mixture weights must sum to one");
  if (std::abs(mean) > kTol) fail("mixture mean must be zero");
  if (std::abs(second - 1.0) > kTol) fail("mixture variance must be one");
}

double egarch_step(const EgarchParams& par, std::span<double> state, double y) {
  const std::size_t K = par.factors();
  const std::size_t I = par.components();
  const double log_h = next_log_scale(par, state, state.first(K));
  const double eps = (y - par.mu_y) / std::exp(log_h);
  state[K] = eps;

  // log sum_i p_i / sigma_i exp(-(eps - mu_i)^2 / (2 sigma_i^2)), max-shifted.
  double terms[16];
  std::vector<double> spill;
  double* term = terms;
  if (I > 16) {
    spill.resize(I);
    term = spill.data();
  }
  double m = kNegInf;
  for (std::size_t i = 0; i < I; ++i) {
    const double d = eps - par.mu[i];
    term[i] = par.log_p_over_sigma[i] - d * d * par.inv_two_var[i];
    m = std::max(m, term[i]);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < I; ++i) s += std::exp(term[i] - m);
  const double result = -0.5 * kLogTwoPi - log_h + m + std::log(s);
  return std::isfinite(result) ? result : kNegInf;
}

std::vector<double> egarch_simulate(const EgarchParams& par, std::size_t T, RandomStream& stream) {
  validate(par);
  const std::size_t K = par.factors();
  std::vector<double> state(K + 1, 0.0);
  std::vector<double> ys;
  ys.reserve(T);
  std::vector<double> cumulative(par.components());
  std::partial_sum(par.p.begin(), par.p.end(), cumulative.begin());
  for (std::size_t t = 0; t < T; ++t) {
    const double log_h = next_log_scale(par, state, std::span<double>(state).first(K));
    const double u = stream.uniform() * cumulative.back();
    const auto i = static_cast<std::size_t>(
        std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin(),
                                 static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    const double eps = par.mu[i] + par.sigma[i] * stream.normal();
    state[K] = eps;
    ys.push_back(par.mu_y + std::exp(log_h) * eps);
  }
  return ys;
}

EgarchModel::EgarchModel(std::size_t K, std::size_t I) : layout_{K, I} {
  if (K < 1 || I < 1) throw UsageError("EGARCH needs K >= 1 and I >= 1");
  prior_mean_.assign(dim(), 0.0);
  prior_sd_.assign(dim(), 1.0);
  prior_mean_[1] = std::log(0.01);
  for (std::size_t k = 0; k < K; ++k) {
    prior_mean_[layout_.theta3(k)] = std::atanh(0.95);
    prior_mean_[layout_.theta4(k)] = std::log(0.10);
    prior_sd_[layout_.theta5(k)] = 0.2;
  }
}

std::string EgarchModel::id() const {
  std::ostringstream s;
  s << "egarch(K=" << layout_.K << ",I=" << layout_.I << ")";
  return s.str();
}

void EgarchModel::sample_prior(RandomStream& stream, std::span<double> theta) const {
  const auto& means = prior_mean_;
  const auto& sds = prior_sd_;
  for (std::size_t d = 0; d < dim(); ++d) theta[d] = means[d] + sds[d] * stream.normal();
  for (std::size_t i = 0; i < layout_.I; ++i) {
    // Rejection from the untruncated normal; acceptance probability 0.9987.
    double& x = theta[layout_.theta8(i)];
    while (x < kTheta8Lower) x = means[layout_.theta8(i)] + sds[layout_.theta8(i)] * stream.normal();
  }
}

double EgarchModel::log_prior(std::span<const double> theta) const {
  const auto& m = prior_mean_;
  const auto& sd = prior_sd_;
  double lp = 0.0;
  for (std::size_t d = 0; d < dim(); ++d) lp += log_normal_pdf(theta[d], m[d], sd[d]);
  // Each truncated coordinate is renormalized by P(theta8 >= -3) = Phi(3).
  const double log_mass = std::log(normal_cdf(-kTheta8Lower));
  for (std::size_t i = 0; i < layout_.I; ++i) {
    if (theta[layout_.theta8(i)] < kTheta8Lower) return kNegInf;
    lp -= log_mass;
  }
  return std::isfinite(lp) ? lp : kNegInf;
}

double EgarchModel::log_cond_density(std::span<const double> theta, std::span<double> state,
                                     double y) const {
  return egarch_step(egarch_transform(theta, layout_), state, y);
}

double EgarchModel::log_likelihood(std::span<const double> theta, std::span<const double> ys,
                                   std::span<double> state) const {
  const auto par = egarch_transform(theta, layout_);
  init_state(state);
  double total = 0.0;
  for (double y : ys) {
    const double d = egarch_step(par, state, y);
    if (!(d > kNegInf)) return kNegInf;
    total += d;
  }
  return total;
}

std::vector<FunctionInfo> EgarchModel::functions() const {
  return {{"log_volatility", true}, {"skewness", true}, {"loss_probability_3pct", true}};
}

EgarchTestValues EgarchModel::test_values(std::span<const double> theta,
                                          std::span<const double> state) const {
  const auto par = egarch_transform(theta, layout_);
  const std::size_t K = layout_.K;
  EgarchTestValues out;
  double sum_v = 0.0;
  for (std::size_t k = 0; k < K; ++k) sum_v += state[k];
  out.log_volatility = std::log(par.sigma_y) + 0.5 * sum_v;
  for (std::size_t i = 0; i < layout_.I; ++i) {
    out.skewness += par.p[i] * (par.mu[i] * par.mu[i] * par.mu[i] + 3.0 * par.mu[i] * par.sigma[i] * par.sigma[i]);
  }
  std::vector<double> v_next(K);
  const double h_next = std::exp(next_log_scale(par, state, v_next));
  const double z = (kLossThreshold - par.mu_y) / h_next;
  for (std::size_t i = 0; i < layout_.I; ++i) {
    out.loss_probability += par.p[i] * normal_cdf((z - par.mu[i]) / par.sigma[i]);
  }
  return out;
}

double EgarchModel::evaluate_function(std::size_t index, std::span<const double> theta,
                                      std::span<const double> state) const {
  const auto v = test_values(theta, state);
  switch (index) {
    case 0: return v.log_volatility;
    case 1: return v.skewness;
    case 2: return v.loss_probability;
    default: return Model::evaluate_function(index, theta, state);
  }
}

double EgarchModel::simulate_next(std::span<const double> theta, std::span<const double> state,
                                  RandomStream& stream) const {
  const auto par = egarch_transform(theta, layout_);
  std::vector<double> v_next(layout_.K);
  const double h = std::exp(next_log_scale(par, state, v_next));
  double u = stream.uniform();
  std::size_t i = 0;
  while (i + 1 < layout_.I && u >= par.p[i]) u -= par.p[i++];
  return par.mu_y + h * (par.mu[i] + par.sigma[i] * stream.normal());
}

}  // namespace spsim::models
