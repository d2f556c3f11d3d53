#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "spsim/cli.hpp"
#include "spsim/design_record.hpp"
#include "spsim/engine.hpp"
#include "spsim/error.hpp"
#include "spsim/models/conjugate_normal.hpp"
#include "spsim/models/egarch.hpp"
#include "spsim/models/registry.hpp"
#include "spsim/report.hpp"
#include "spsim/resampling.hpp"
#include "spsim/series_io.hpp"

namespace py = pybind11;
using namespace spsim;

namespace {

models::ModelOptions model_options(const std::string& model, std::size_t K, std::size_t I, double m0, double v0,
                                   double sigma2) {
  models::ModelOptions o;
  o.name = model;
  o.K = K;
  o.I = I;
  o.m0 = m0;
  o.v0 = v0;
  o.sigma2 = sigma2;
  return o;
}

EngineConfig engine_config(std::size_t J, std::size_t N, std::uint64_t seed, double rss_threshold,
                           const std::string& rule, const std::string& resampler, const std::string& proposal,
                           std::vector<std::size_t> forced_dates, std::vector<std::size_t> moment_dates,
                           std::optional<std::size_t> burn_in, bool pit, std::optional<std::uint64_t> replay_seed) {
  EngineConfig c;
  c.J = J;
  c.N = N;
  c.seed = seed;
  c.rss_threshold = rss_threshold;
  c.rule.kind = parse_mphase_rule(rule);
  c.scheme = parse_resample_scheme(resampler);
  c.proposal = parse_proposal_kind(proposal);
  c.forced_dates = std::move(forced_dates);
  c.moment_dates = std::move(moment_dates);
  c.burn_in = burn_in;
  c.compute_pit = pit;
  c.replay_seed = replay_seed;
  return c;
}

py::bytes design_bytes(const DesignRecord& d) {
  std::ostringstream out;
  write_design(out, d);
  return py::bytes(out.str());
}

}  // namespace

PYBIND11_MODULE(_spsim, m) {
  m.doc() = "Sequential posterior simulation core";

  static py::exception<UsageError> usage_error(m, "UsageError", PyExc_ValueError);
  static py::exception<DataError> data_error(m, "DataError", PyExc_ValueError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UsageError& e) {
      PyErr_SetString(usage_error.ptr(), e.what());
    } catch (const ContractError& e) {
      PyErr_SetString(usage_error.ptr(), e.what());
    } catch (const DataError& e) {
      PyErr_SetString(data_error.ptr(), e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical_error.ptr(), e.what());
    }
  });

  m.def(
      "simulate",
      [](const std::string& model, std::size_t T, std::uint64_t seed, std::size_t K, std::size_t I, double m0,
         double v0, double sigma2, std::optional<std::vector<double>> theta) {
        return models::simulate_series(model_options(model, K, I, m0, v0, sigma2), T, seed, theta);
      },
      py::arg("model"), py::arg("T"), py::arg("seed") = 1, py::arg("K") = 1, py::arg("I") = 1, py::arg("m0") = 0.0,
      py::arg("v0") = 1.0, py::arg("sigma2") = 1.0, py::arg("theta") = py::none());

  m.def(
      "_run",
      [](const std::string& mode, const std::vector<double>& data, const std::string& model, std::size_t K,
         std::size_t I, double m0, double v0, double sigma2, std::size_t J, std::size_t N, std::uint64_t seed,
         double rss_threshold, const std::string& rule, const std::string& resampler, const std::string& proposal,
         std::vector<std::size_t> forced_dates, std::vector<std::size_t> moment_dates,
         std::optional<std::size_t> burn_in, bool pit, std::optional<std::uint64_t> replay_seed) {
        const auto m = models::make_model(model_options(model, K, I, m0, v0, sigma2));
        const auto cfg = engine_config(J, N, seed, rss_threshold, rule, resampler, proposal,
                                       std::move(forced_dates), std::move(moment_dates), burn_in, pit, replay_seed);
        ReportFile file;
        DesignRecord design;
        {
          py::gil_scoped_release release;
          if (mode == "hybrid") {
            const auto h = run_hybrid(*m, data, cfg);
            file.runs = {make_report(h.adaptive, "adaptive", &cfg, *m),
                         make_report(h.replay, "nonadaptive", nullptr, *m)};
            design = h.replay.design;
          } else {
            const auto r = run_adaptive(*m, data, cfg);
            file.runs = {make_report(r, "adaptive", &cfg, *m)};
            design = r.design;
          }
        }
        return py::make_tuple(report_to_json(file), design_bytes(design));
      },
      py::arg("mode"), py::arg("data"), py::arg("model"), py::arg("K"), py::arg("I"), py::arg("m0"), py::arg("v0"),
      py::arg("sigma2"), py::arg("J"), py::arg("N"), py::arg("seed"), py::arg("rss_threshold"), py::arg("rule"),
      py::arg("resampler"), py::arg("proposal"), py::arg("forced_dates"), py::arg("moment_dates"),
      py::arg("burn_in"), py::arg("pit"), py::arg("replay_seed"));

  m.def(
      "_replay",
      [](const std::vector<double>& data, const std::string& design_blob, std::uint64_t seed, const std::string& model,
         std::size_t K, std::size_t I, double m0, double v0, double sigma2, std::optional<std::size_t> burn_in,
         bool pit) {
        const auto m = models::make_model(model_options(model, K, I, m0, v0, sigma2));
        std::istringstream in(design_blob);
        const auto design = read_design(in);
        ReplayOptions opts;
        opts.burn_in = burn_in;
        opts.compute_pit = pit;
        py::gil_scoped_release release;
        const auto r = run_nonadaptive(*m, data, design, seed, opts);
        return report_to_json({{make_report(r, "nonadaptive", nullptr, *m)}});
      },
      py::arg("data"), py::arg("design"), py::arg("seed"), py::arg("model"), py::arg("K"), py::arg("I"),
      py::arg("m0"), py::arg("v0"), py::arg("sigma2"), py::arg("burn_in"), py::arg("pit"));

  m.def(
      "conjugate_oracle",
      [](const std::vector<double>& data, double m0, double v0, double sigma2) {
        const auto o = models::conjugate_oracle(data, m0, v0, sigma2);
        py::dict d;
        d["posterior_mean"] = o.posterior_mean;
        d["posterior_variance"] = o.posterior_variance;
        d["log_ml"] = o.log_ml;
        d["log_predictive"] = o.log_predictive;
        return d;
      },
      py::arg("data"), py::arg("m0") = 0.0, py::arg("v0") = 1.0, py::arg("sigma2") = 1.0);

  m.def(
      "egarch_log_likelihood",
      [](const std::vector<double>& theta, const std::vector<double>& y, std::size_t K, std::size_t I) {
        models::EgarchModel model(K, I);
        if (theta.size() != model.dim()) throw UsageError("theta must have length " + std::to_string(model.dim()));
        std::vector<double> state(model.state_size());
        return model.log_likelihood(theta, y, state);
      },
      py::arg("theta"), py::arg("y"), py::arg("K") = 1, py::arg("I") = 1);

  m.def(
      "resample",
      [](const std::vector<double>& weights, const std::string& scheme, std::uint64_t seed) {
        RandomStream s({seed, 0, 0, Phase::S, 0, 0});
        return resample_group(weights, parse_resample_scheme(scheme), s);
      },
      py::arg("weights"), py::arg("scheme") = "residual", py::arg("seed") = 1);

  m.def(
      "ingest_series",
      [](const std::string& path, const std::string& kind) { return ingest_series(path, parse_series_kind(kind)); },
      py::arg("path"), py::arg("kind") = "returns");

  m.def(
      "cli_main",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int rc = cli_main(args, out, err);
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"));
}
