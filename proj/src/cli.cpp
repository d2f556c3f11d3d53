#include "spsim/cli.hpp"

#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "spsim/design_record.hpp"
#include "spsim/engine.hpp"
#include "spsim/error.hpp"
#include "spsim/models/registry.hpp"
#include "spsim/report.hpp"
#include "spsim/series_io.hpp"

namespace spsim {

namespace {

struct Options {
  models::ModelOptions model;
  std::string data;
  std::string data_kind = "returns";
  EngineConfig engine;
  std::string rule = "deterministic";
  std::string resampler = "residual";
  std::string proposal = "random_walk";
  std::optional<std::uint64_t> replay_seed;
  std::optional<std::size_t> burn_in;
  std::string design_out = "design.spd";
  std::string design_in;
  std::string report_out = "report.json";
  std::string report_in;
  std::string csv_prefix;
  std::size_t T = 500;
  std::vector<double> theta;
  std::string out = "series.csv";
};

std::string strip_json(const std::string& path) {
  const std::string ext = ".json";
  if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
    return path.substr(0, path.size() - ext.size());
  }
  return path;
}

void finish_engine(Options& o) {
  o.engine.rule.kind = parse_mphase_rule(o.rule);
  o.engine.scheme = parse_resample_scheme(o.resampler);
  o.engine.proposal = parse_proposal_kind(o.proposal);
  o.engine.replay_seed = o.replay_seed;
  o.engine.burn_in = o.burn_in;
}

std::vector<double> load_data(const Options& o) {
  if (o.data.empty()) throw UsageError("--data is required");
  return ingest_series(o.data, parse_series_kind(o.data_kind));
}

void emit(const Options& o, const ReportFile& file, const std::vector<std::string>& suffixes, std::ostream& out) {
  save_report(o.report_out, file);
  write_timings(o.report_out, file);
  const std::string prefix = strip_json(o.report_out);
  for (std::size_t i = 0; i < file.runs.size(); ++i) write_trace_csvs(prefix + suffixes[i], file.runs[i]);
  render_report(out, file);
}

int do_run(Options& o, std::ostream& out) {
  finish_engine(o);
  const auto model = models::make_model(o.model);
  const auto y = load_data(o);
  const auto result = run_adaptive(*model, y, o.engine);
  save_design(o.design_out, result.design);
  ReportFile file{{make_report(result, "adaptive", &o.engine, *model)}};
  emit(o, file, {""}, out);
  return exit_ok;
}

int do_replay(Options& o, std::ostream& out) {
  if (o.design_in.empty()) throw UsageError("--design-in is required");
  const auto model = models::make_model(o.model);
  const auto y = load_data(o);
  const auto design = load_design(o.design_in);
  ReplayOptions options;
  options.burn_in = o.burn_in;
  options.compute_pit = o.engine.compute_pit;
  options.pit_draws = o.engine.pit_draws;
  const auto result = run_nonadaptive(*model, y, design, o.engine.seed, options);
  ReportFile file{{make_report(result, "nonadaptive", nullptr, *model)}};
  emit(o, file, {""}, out);
  return exit_ok;
}

int do_hybrid(Options& o, std::ostream& out) {
  finish_engine(o);
  const auto model = models::make_model(o.model);
  const auto y = load_data(o);
  const auto result = run_hybrid(*model, y, o.engine);
  save_design(o.design_out, result.replay.design);
  ReportFile file{{make_report(result.adaptive, "adaptive", &o.engine, *model),
                   make_report(result.replay, "nonadaptive", nullptr, *model)}};
  emit(o, file, {".adaptive", ".replay"}, out);
  return exit_ok;
}

int do_simulate(Options& o, std::ostream& out) {
  std::optional<std::vector<double>> theta;
  if (!o.theta.empty()) theta = o.theta;
  const auto y = models::simulate_series(o.model, o.T, o.engine.seed, theta);
  write_series(o.out, y);
  out << "wrote " << y.size() << " observations to " << o.out << "\n";
  return exit_ok;
}

int do_report(Options& o, std::ostream& out) {
  if (o.report_in.empty()) throw UsageError("--report-in is required");
  const auto file = load_report(o.report_in);
  if (!o.csv_prefix.empty()) {
    for (std::size_t i = 0; i < file.runs.size(); ++i) {
      const std::string suffix = file.runs.size() == 1 ? "" : "." + std::to_string(i + 1);
      write_trace_csvs(o.csv_prefix + suffix, file.runs[i]);
    }
  }
  render_report(out, file);
  return exit_ok;
}

void add_model_options(CLI::App& app, Options& o) {
  app.add_option("--model", o.model.name, "conjugate | egarch | bimodal")->capture_default_str();
  app.add_option("--K", o.model.K, "EGARCH volatility factors")->capture_default_str();
  app.add_option("--I", o.model.I, "EGARCH mixture components")->capture_default_str();
  app.add_option("--m0", o.model.m0, "conjugate prior mean")->capture_default_str();
  app.add_option("--v0", o.model.v0, "prior variance (conjugate, bimodal)")->capture_default_str();
  app.add_option("--sigma2", o.model.sigma2, "observation variance (conjugate, bimodal)")->capture_default_str();
}

void add_data_options(CLI::App& app, Options& o) {
  app.add_option("--data", o.data, "series file, one value per row");
  app.add_option("--data-kind", o.data_kind, "prices | returns")->capture_default_str();
}

void add_engine_options(CLI::App& app, Options& o) {
  auto& e = o.engine;
  app.add_option("--J", e.J, "groups")->capture_default_str();
  app.add_option("--N", e.N, "particles per group")->capture_default_str();
  app.add_option("--rss-threshold", e.rss_threshold, "end a C phase when RSS falls below this")
      ->capture_default_str();
  app.add_option("--mphase-rule", o.rule, "deterministic | rne")->capture_default_str();
  app.add_option("--rbar", e.rule.rbar)->capture_default_str();
  app.add_option("--kappa", e.rule.kappa)->capture_default_str();
  app.add_option("--d1", e.rule.d1)->capture_default_str();
  app.add_option("--d2", e.rule.d2)->capture_default_str();
  app.add_option("--e1", e.rule.e1)->capture_default_str();
  app.add_option("--e2", e.rule.e2)->capture_default_str();
  app.add_option("--rmax", e.rule.rmax)->capture_default_str();
  app.add_option("--resampler", o.resampler, "residual | multinomial | stratified | systematic")
      ->capture_default_str();
  app.add_option("--proposal", o.proposal, "random_walk | independence")->capture_default_str();
  app.add_option("--forced-dates", e.forced_dates, "comma-separated dates")->delimiter(',');
  app.add_option("--moment-dates", e.moment_dates, "comma-separated dates")->delimiter(',');
  app.add_option("--replay-seed", o.replay_seed, "seed of the second hybrid pass");
  app.add_option("--design-out", o.design_out)->capture_default_str();
}

void add_output_options(CLI::App& app, Options& o) {
  app.add_option("--seed", o.engine.seed)->capture_default_str();
  app.add_option("--burn-in", o.burn_in, "observations excluded from the log score");
  app.add_flag("--pit", o.engine.compute_pit, "compute probability integral transforms");
  app.add_option("--pit-draws", o.engine.pit_draws)->capture_default_str();
  app.add_option("--report-out", o.report_out)->capture_default_str();
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential posterior simulation"};
  app.name("spsim");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or INI file; command-line flags take precedence");
  Options o;

  auto* run = app.add_subcommand("run", "adaptive run; writes design and report");
  auto* replay = app.add_subcommand("replay", "nonadaptive run from a saved design");
  auto* hybrid = app.add_subcommand("hybrid", "adaptive pass, then replay with a new seed");
  auto* simulate = app.add_subcommand("simulate", "write a synthetic series");
  auto* report = app.add_subcommand("report", "render a saved report");

  for (auto* sub : {run, replay, hybrid}) {
    add_model_options(*sub, o);
    add_data_options(*sub, o);
    add_output_options(*sub, o);
  }
  add_engine_options(*run, o);
  add_engine_options(*hybrid, o);
  replay->add_option("--design-in", o.design_in)->required();

  add_model_options(*simulate, o);
  simulate->add_option("--T", o.T, "length")->capture_default_str();
  simulate->add_option("--seed", o.engine.seed)->capture_default_str();
  simulate->add_option("--theta", o.theta, "parameter vector, comma-separated")->delimiter(',');
  simulate->add_option("--out", o.out)->capture_default_str();

  report->add_option("--report-in", o.report_in)->required();
  report->add_option("--csv-prefix", o.csv_prefix, "also write CSV traces with this prefix");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::CallForVersion& e) {
    out << "spsim\n";
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return exit_usage;
  }

  try {
    if (run->parsed()) return do_run(o, out);
    if (replay->parsed()) return do_replay(o, out);
    if (hybrid->parsed()) return do_hybrid(o, out);
    if (simulate->parsed()) return do_simulate(o, out);
    return do_report(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return exit_data;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace spsim
