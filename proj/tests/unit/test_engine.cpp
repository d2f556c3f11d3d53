#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "spsim/design_record.hpp"
#include "spsim/engine.hpp"
#include "spsim/error.hpp"
#include "spsim/models/conjugate_normal.hpp"
#include "spsim/models/egarch.hpp"
#include "spsim/parallel.hpp"
#include "test_support.hpp"

using namespace spsim;

namespace {
EngineConfig small_config(std::uint64_t seed) {
  EngineConfig c;
  c.J = 8;
  c.N = 128;
  c.seed = seed;
  return c;
}
}  // namespace

TEST_CASE("a short series that never crosses the threshold is one cycle") {
  models::ConjugateNormalModel model;
  const std::vector<double> y{0.1};
  const auto run = run_adaptive(model, y, small_config(1));
  CHECK(run.cycle_count() == 1);
  CHECK(run.design.cycles.front().t_end == 1);
  CHECK(!run.design.cycles.front().selected);
  CHECK(run.total_sweeps() == 0);
}

TEST_CASE("adaptive run postconditions") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(100, 2, 0.2);
  auto cfg = small_config(3);
  cfg.forced_dates = {30};
  cfg.moment_dates = {50};
  const auto run = run_adaptive(model, y, cfg);
  std::size_t prev = 0;
  for (const auto& c : run.design.cycles) {
    CHECK(c.t_end > prev);
    prev = c.t_end;
  }
  CHECK(prev == 100);
  for (double r : run.trace.rss) CHECK(r <= 1.0 + 1e-12);
  bool saw30 = false, saw50 = false;
  for (const auto& c : run.trace.cycles) {
    saw30 |= c.t_end == 30;
    saw50 |= c.t_end == 50;
    if (c.t_end != 100 && !c.forced) CHECK(c.rss_at_end < 0.5);
  }
  CHECK(saw30);
  CHECK(saw50);
  bool moment50 = false;
  for (const auto& m : run.moments) moment50 |= m.t == 50;
  CHECK(moment50);

  const auto oracle = models::conjugate_oracle(y, 0.0, 1.0, 1.0);
  const auto it = std::find_if(run.moments.begin(), run.moments.end(),
                               [](const MomentReport& r) { return r.name == "theta" && r.t == 100; });
  REQUIRE(it != run.moments.end());
  const auto& m = *it;
  CHECK(std::abs(m.mean - oracle.posterior_mean) < 4.0 * m.nse);
}

TEST_CASE("replay is bit identical and follows the design") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(80, 4);
  const auto adaptive = run_adaptive(model, y, small_config(5));
  const auto r1 = run_nonadaptive(model, y, adaptive.design, 99);
  const auto r2 = run_nonadaptive(model, y, adaptive.design, 99);
  CHECK(r1.particles == r2.particles);
  CHECK(r1.moments == r2.moments);
  CHECK(r1.evidence == r2.evidence);
  REQUIRE(r1.trace.cycles.size() == adaptive.trace.cycles.size());
  for (std::size_t l = 0; l < r1.trace.cycles.size(); ++l) {
    CHECK(r1.trace.cycles[l].t_end == adaptive.trace.cycles[l].t_end);
    CHECK(r1.trace.cycles[l].sweeps == adaptive.trace.cycles[l].sweeps);
  }
  const double bound = 4.0 * std::hypot(r1.evidence.log_ml_nse, adaptive.evidence.log_ml_nse);
  CHECK(std::abs(r1.evidence.log_ml - adaptive.evidence.log_ml) < bound);
}

TEST_CASE("replay rejects mismatched designs before computing") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(40, 6);
  const auto adaptive = run_adaptive(model, y, small_config(7));
  auto other = y;
  other[3] += 1e-9;
  CHECK_THROWS_AS(run_nonadaptive(model, other, adaptive.design, 1), DataError);
  models::ConjugateNormalModel wrong(0.0, 2.0, 1.0);
  CHECK_THROWS_AS(run_nonadaptive(wrong, y, adaptive.design, 1), DataError);
  auto shorter = y;
  shorter.pop_back();
  CHECK_THROWS_AS(run_nonadaptive(model, shorter, adaptive.design, 1), DataError);
}

TEST_CASE("single-cycle design with no sweeps is importance sampling from the prior") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(5, 8);
  auto design = run_adaptive(model, y, small_config(9)).design;
  design.cycles.clear();
  design.cycles.push_back({5, false, false, {}});
  const auto run = run_nonadaptive(model, y, design, 11);
  auto ps = init_particles(model, 8, 128, 11);
  for (double v : y) c_phase_step(ps, model, v);
  const auto g = weighted_group_means(ps.log_weight, ps.theta, 8, 128);
  CHECK(run.moments.front().mean == doctest::Approx(g.grand_mean).epsilon(1e-14));
}

TEST_CASE("hybrid run produces paired, consistent results") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(60, 10);
  const auto h = run_hybrid(model, y, small_config(12));
  CHECK(h.adaptive.particles.size() == 0);
  CHECK(h.replay.design.replay_seed == small_config(12).effective_replay_seed());
  CHECK(h.replay.design.replay_seed != 12);
  for (const auto& m : h.replay.moments) CHECK(m.nse > 0.0);
  const double bound = 4.0 * std::hypot(h.adaptive.evidence.log_ml_nse, h.replay.evidence.log_ml_nse);
  CHECK(std::abs(h.adaptive.evidence.log_ml - h.replay.evidence.log_ml) < bound);
}

TEST_CASE("results do not depend on the worker count") {
  models::EgarchModel model(1, 2);
  const auto y = testing::normal_series(60, 13, 0.0, 0.01);
  auto cfg = small_config(14);
  cfg.N = 64;
  const int saved = worker_count();
  set_worker_count(1);
  const auto a = run_adaptive(model, y, cfg);
  set_worker_count(4);
  const auto b = run_adaptive(model, y, cfg);
  set_worker_count(saved);
  CHECK(a.particles == b.particles);
  CHECK(a.evidence == b.evidence);
}

TEST_CASE("design round trip and truncation") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(50, 15);
  auto cfg = small_config(16);
  cfg.proposal = ProposalKind::independence;
  const auto run = run_adaptive(model, y, cfg);
  std::stringstream buf;
  write_design(buf, run.design);
  const std::string bytes = buf.str();
  std::stringstream in(bytes);
  const auto back = read_design(in);
  std::stringstream again;
  write_design(again, back);
  CHECK(again.str() == bytes);
  CHECK(back.total_sweeps() == run.design.total_sweeps());
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    std::stringstream t(bytes.substr(0, cut));
    CHECK_THROWS_AS(read_design(t), SchemaError);
  }
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream b(bad);
  CHECK_THROWS_AS(read_design(b), SchemaError);
}

TEST_CASE("configuration validation") {
  models::ConjugateNormalModel model;
  const auto y = testing::normal_series(10, 17);
  auto cfg = small_config(1);
  cfg.J = 1;
  CHECK_THROWS_AS(run_adaptive(model, y, cfg), UsageError);
  cfg = small_config(1);
  cfg.forced_dates = {11};
  CHECK_THROWS_AS(run_adaptive(model, y, cfg), UsageError);
  cfg = small_config(1);
  CHECK_THROWS(run_adaptive(model, std::vector<double>{}, cfg));
}
