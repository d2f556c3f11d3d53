#include <cmath>
#include <numeric>

#include "doctest.h"
#include "spsim/diagnostics.hpp"
#include "spsim/engine.hpp"
#include "spsim/error.hpp"
#include "spsim/models/conjugate_normal.hpp"
#include "test_support.hpp"

using namespace spsim;

TEST_CASE("NSE examples") {
  const auto a = nse_from_group_means(std::vector<double>{0.0, 1.0}, 1);
  CHECK(a.vhat == doctest::Approx(0.5));
  CHECK(a.nse == doctest::Approx(0.5));
  const auto b = nse_from_group_means(std::vector<double>{2.0, 2.0, 2.0}, 10);
  CHECK(b.nse == 0.0);
  CHECK_THROWS(nse_from_group_means(std::vector<double>{1.0}, 10));
}

TEST_CASE("scaling g scales NSE and keeps RNE") {
  models::ConjugateNormalModel model;
  const auto ps = init_particles(model, 8, 64, 2);
  std::vector<double> g(ps.theta), g3(ps.theta);
  for (auto& v : g3) v *= -3.0;
  const auto m1 = moment_report("g", 0, ps.log_weight, g, 8, 64);
  const auto m3 = moment_report("g", 0, ps.log_weight, g3, 8, 64);
  CHECK(m3.nse == doctest::Approx(3.0 * m1.nse));
  CHECK(*m3.rne == doctest::Approx(*m1.rne));
}

TEST_CASE("RNE of i.i.d. prior draws is near one") {
  models::ConjugateNormalModel model;
  const auto ps = init_particles(model, 32, 256, 3);
  const auto m = moment_report("theta", 0, ps.log_weight, ps.theta, 32, 256);
  REQUIRE(m.rne);
  CHECK(*m.rne > 0.6);
  CHECK(*m.rne < 1.6);
}

TEST_CASE("RNE of within-group copies is small") {
  models::ConjugateNormalModel model;
  auto ps = init_particles(model, 16, 100, 3);
  for (std::size_t j = 0; j < 16; ++j)
    for (std::size_t n = 1; n < 100; ++n) ps.theta[ps.index(j, n)] = ps.theta[ps.index(j, 0)];
  const auto m = moment_report("theta", 0, ps.log_weight, ps.theta, 16, 100);
  CHECK(*m.rne < 0.1);
  const auto c = moment_report("c", 0, ps.log_weight, std::vector<double>(1600, 1.0), 16, 100);
  CHECK(!c.rne);
}

TEST_CASE("posterior variance uses the JN-1 denominator") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(posterior_variance(std::vector<double>(4, 0.0), v, 2, 2, 2.5) == doctest::Approx(5.0 / 3.0));
}

namespace {
WeightTrace trace_from(const std::vector<std::vector<double>>& rows, std::size_t N) {
  WeightTrace t;
  t.groups = rows.front().size();
  t.per_group = N;
  CycleWeights c;
  c.start_t = 0;
  c.end_t = rows.size();
  c.group_log_mean = rows;
  t.cycles.push_back(c);
  return t;
}
}  // namespace

TEST_CASE("evidence NSE matches a direct two-pass computation") {
  const std::vector<double> a{-101.2, -100.7, -100.9, -101.5, -100.1};
  const auto e = evidence_accumulate(trace_from({a}, 10), 1);
  double mean = 0;
  for (double v : a) mean += std::exp(v + 100.0);
  mean /= 5.0;
  double ss = 0;
  for (double v : a) ss += (std::exp(v + 100.0) - mean) * (std::exp(v + 100.0) - mean);
  const double nse = std::sqrt(ss / (5.0 * 4.0));
  CHECK(e.log_ml == doctest::Approx(std::log(mean) - 100.0).epsilon(1e-13));
  CHECK(e.log_ml_nse == doctest::Approx(nse / mean).epsilon(1e-12));
}

TEST_CASE("evidence is overflow safe and zero NSE for identical groups") {
  const auto e = evidence_accumulate(trace_from({{-90000.0, -90000.0, -90000.0}}, 4), 1);
  CHECK(e.log_ml == doctest::Approx(-90000.0));
  CHECK(e.log_ml_nse == 0.0);
  CHECK_THROWS(evidence_accumulate(trace_from({{0.0, 0.0}}, 4), 2));
}

TEST_CASE("single observation evidence matches the closed form") {
  models::ConjugateNormalModel model;
  auto ps = init_particles(model, 16, 512, 4);
  const std::vector<double> y{0.8};
  c_phase_step(ps, model, y[0]);
  WeightTrace t{16, 512, {{0, 1, {group_log_mean_weights(ps)}}}};
  const auto e = evidence_accumulate(t, 1);
  const auto oracle = models::conjugate_oracle(y, 0.0, 1.0, 1.0);
  CHECK(std::abs(e.log_ml - oracle.log_ml) < 4.0 * e.log_ml_nse);
}

TEST_CASE("predictive likelihood and evidence on an oracle run") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(60, 9, 0.3);
  EngineConfig cfg;
  cfg.J = 16;
  cfg.N = 256;
  cfg.seed = 12;
  cfg.burn_in = 20;
  const auto run = run_adaptive(model, y, cfg);
  const auto oracle = models::conjugate_oracle(y, 0.0, 1.0, 1.0);
  CHECK(std::abs(run.evidence.log_ml - oracle.log_ml) < 4.0 * run.evidence.log_ml_nse);
  double score = 0.0;
  for (std::size_t s = 20; s < 60; ++s) score += oracle.log_predictive[s];
  REQUIRE(run.evidence.log_score);
  CHECK(std::abs(*run.evidence.log_score - score) < 4.0 * *run.evidence.log_score_nse);

  // Product of per-cycle predictive likelihoods equals the product-form estimator.
  double sum = 0.0;
  for (const auto& c : run.trace.weights.cycles) {
    sum += predictive_likelihood(run.trace.weights, c.start_t, c.end_t).log_value;
  }
  CHECK(sum == doctest::Approx(run.evidence.log_ml_tilde).epsilon(1e-12));

  const auto& c0 = run.trace.weights.cycles.front();
  const auto p1 = predictive_likelihood(run.trace.weights, c0.start_t, c0.start_t + 1);
  CHECK(std::abs(p1.value - std::exp(oracle.log_predictive[0])) < 4.0 * p1.nse);
  CHECK_THROWS(predictive_likelihood(run.trace.weights, c0.start_t + 1, c0.end_t));
}

TEST_CASE("PIT examples") {
  models::ConjugateNormalModel model;
  auto ps = init_particles(model, 2, 50, 1);
  const auto id = [](double v) { return v; };
  CHECK(pit(ps, model, 1e300, id, 1, 1) == 1.0);
  CHECK(pit(ps, model, -1e300, id, 1, 1) == 0.0);
  // Every particle at zero: draws are symmetric about zero, so roughly half fall below.
  std::fill(ps.theta.begin(), ps.theta.end(), 0.0);
  const double half = pit(ps, model, 0.0, id, 200, 1);
  CHECK(std::abs(half - 0.5) < 0.03);
}

TEST_CASE("PIT sequence of a correctly specified model is uniform") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(500, 21, 0.4);
  EngineConfig cfg;
  cfg.J = 8;
  cfg.N = 256;
  cfg.seed = 5;
  cfg.compute_pit = true;
  const auto run = run_adaptive(model, y, cfg);
  REQUIRE(run.trace.pit.size() == 500);
  CHECK(testing::ks_uniform_pvalue(run.trace.pit) > 0.01);
}
