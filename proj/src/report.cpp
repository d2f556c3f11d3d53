#include "spsim/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "spsim/error.hpp"

namespace spsim {

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "spsim-report";
constexpr int kFormatVersion = 1;

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

// Non-finite reals are written as null; they only occur in degenerate runs.
json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json optional_reals(const std::vector<std::optional<double>>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(optional_to_json(v));
  return out;
}

std::vector<std::optional<double>> optional_reals_from(const json& j) {
  std::vector<std::optional<double>> out;
  for (const auto& v : j) out.push_back(optional_from_json<double>(v));
  return out;
}

json to_json(const ConfigEcho& c) {
  return {{"mode", c.mode},
          {"model", c.model_id},
          {"J", c.J},
          {"N", c.N},
          {"T", c.T},
          {"seed", c.seed},
          {"design_hash", c.design_hash},
          {"rss_threshold", c.rss_threshold},
          {"mphase_rule", std::string(to_string(c.rule.kind))},
          {"rbar", c.rule.rbar},
          {"kappa", c.rule.kappa},
          {"d1", c.rule.d1},
          {"d2", c.rule.d2},
          {"e1", c.rule.e1},
          {"e2", c.rule.e2},
          {"rmax", c.rule.rmax},
          {"resampler", c.resampler},
          {"proposal", c.proposal},
          {"forced_dates", c.forced_dates},
          {"moment_dates", c.moment_dates},
          {"burn_in", optional_to_json(c.burn_in)}};
}

ConfigEcho config_from_json(const json& j) {
  ConfigEcho c;
  c.mode = j.at("mode").get<std::string>();
  c.model_id = j.at("model").get<std::string>();
  c.J = j.at("J").get<std::size_t>();
  c.N = j.at("N").get<std::size_t>();
  c.T = j.at("T").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.design_hash = j.at("design_hash").get<std::uint64_t>();
  c.rss_threshold = j.at("rss_threshold").get<double>();
  c.rule.kind = parse_mphase_rule(j.at("mphase_rule").get<std::string>());
  c.rule.rbar = j.at("rbar").get<std::size_t>();
  c.rule.kappa = j.at("kappa").get<std::size_t>();
  c.rule.d1 = j.at("d1").get<double>();
  c.rule.d2 = j.at("d2").get<double>();
  c.rule.e1 = j.at("e1").get<double>();
  c.rule.e2 = j.at("e2").get<double>();
  c.rule.rmax = j.at("rmax").get<std::size_t>();
  c.resampler = j.at("resampler").get<std::string>();
  c.proposal = j.at("proposal").get<std::string>();
  c.forced_dates = j.at("forced_dates").get<std::vector<std::size_t>>();
  c.moment_dates = j.at("moment_dates").get<std::vector<std::size_t>>();
  c.burn_in = optional_from_json<std::size_t>(j.at("burn_in"));
  return c;
}

json to_json(const MomentReport& m) {
  return {{"name", m.name}, {"t", m.t},         {"mean", real(m.mean)},
          {"sd", real(m.sd)}, {"nse", real(m.nse)}, {"vhat", real(m.vhat)},
          {"rne", optional_to_json(m.rne)}, {"group_means", m.group_means}};
}

MomentReport moment_from_json(const json& j) {
  MomentReport m;
  m.name = j.at("name").get<std::string>();
  m.t = j.at("t").get<std::size_t>();
  m.mean = real_from(j.at("mean"));
  m.sd = real_from(j.at("sd"));
  m.nse = real_from(j.at("nse"));
  m.vhat = real_from(j.at("vhat"));
  m.rne = optional_from_json<double>(j.at("rne"));
  m.group_means = j.at("group_means").get<std::vector<double>>();
  return m;
}

json to_json(const EvidenceReport& e) {
  return {{"log_ml", real(e.log_ml)},
          {"log_ml_tilde", real(e.log_ml_tilde)},
          {"log_ml_nse", real(e.log_ml_nse)},
          {"burn_in", optional_to_json(e.burn_in)},
          {"log_score", optional_to_json(e.log_score)},
          {"log_score_nse", optional_to_json(e.log_score_nse)},
          {"group_log_products", e.group_log_products},
          {"cycle_group_log_means", e.cycle_group_log_means}};
}

EvidenceReport evidence_from_json(const json& j) {
  EvidenceReport e;
  e.log_ml = real_from(j.at("log_ml"));
  e.log_ml_tilde = real_from(j.at("log_ml_tilde"));
  e.log_ml_nse = real_from(j.at("log_ml_nse"));
  e.burn_in = optional_from_json<std::size_t>(j.at("burn_in"));
  e.log_score = optional_from_json<double>(j.at("log_score"));
  e.log_score_nse = optional_from_json<double>(j.at("log_score_nse"));
  e.group_log_products = j.at("group_log_products").get<std::vector<double>>();
  e.cycle_group_log_means = j.at("cycle_group_log_means").get<std::vector<std::vector<double>>>();
  return e;
}

json to_json(const RunReport& r) {
  json moments = json::array();
  for (const auto& m : r.moments) moments.push_back(to_json(m));
  json cycles = json::array();
  for (const auto& c : r.cycles) {
    cycles.push_back({{"cycle", c.cycle},
                      {"t_end", c.t_end},
                      {"forced", c.forced},
                      {"selected", c.selected},
                      {"rss_at_end", real(c.rss_at_end)},
                      {"sweeps", c.sweeps}});
  }
  json rne = json::array();
  for (const auto& it : r.rne_trace) {
    rne.push_back({{"cycle", it.cycle},
                   {"iteration", it.iteration},
                   {"stepsize", it.stepsize},
                   {"acceptance_rate", it.acceptance_rate},
                   {"mean_rne", optional_to_json(it.mean_rne)},
                   {"rne", optional_reals(it.rne)}});
  }
  return {{"config", to_json(r.config)},
          {"cycle_count", r.cycle_count},
          {"total_sweeps", r.total_sweeps},
          {"evidence", to_json(r.evidence)},
          {"moments", moments},
          {"test_functions", r.test_functions},
          {"cycles", cycles},
          {"rss_trace", r.rss_trace},
          {"rne_trace", rne},
          {"pit", r.pit}};
}

RunReport run_from_json(const json& j) {
  RunReport r;
  r.config = config_from_json(j.at("config"));
  r.cycle_count = j.at("cycle_count").get<std::size_t>();
  r.total_sweeps = j.at("total_sweeps").get<std::size_t>();
  r.evidence = evidence_from_json(j.at("evidence"));
  for (const auto& m : j.at("moments")) r.moments.push_back(moment_from_json(m));
  r.test_functions = j.at("test_functions").get<std::vector<std::string>>();
  for (const auto& c : j.at("cycles")) {
    r.cycles.push_back({c.at("cycle").get<std::size_t>(), c.at("t_end").get<std::size_t>(),
                        c.at("forced").get<bool>(), c.at("selected").get<bool>(),
                        real_from(c.at("rss_at_end")), c.at("sweeps").get<std::size_t>()});
  }
  r.rss_trace = j.at("rss_trace").get<std::vector<double>>();
  for (const auto& it : j.at("rne_trace")) {
    r.rne_trace.push_back({it.at("cycle").get<std::size_t>(), it.at("iteration").get<std::size_t>(),
                           it.at("stepsize").get<double>(), it.at("acceptance_rate").get<double>(),
                           optional_from_json<double>(it.at("mean_rne")), optional_reals_from(it.at("rne"))});
  }
  r.pit = j.at("pit").get<std::vector<double>>();
  return r;
}

std::string csv_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(17) << *v;
  return s.str();
}

}  // namespace

RunReport make_report(const RunResult& run, std::string mode, const EngineConfig* config,
                      const Model& model) {
  RunReport r;
  auto& c = r.config;
  c.mode = std::move(mode);
  c.model_id = run.design.model_id;
  c.J = run.design.J;
  c.N = run.design.N;
  c.T = run.design.T;
  c.design_hash = run.design.config_hash;
  c.resampler = std::string(to_string(run.design.scheme));
  c.proposal = std::string(to_string(run.design.proposal));
  c.forced_dates = run.design.forced_dates;
  c.moment_dates = run.design.moment_dates;
  c.burn_in = run.evidence.burn_in;
  if (config) {
    c.seed = config->seed;
    c.rss_threshold = config->rss_threshold;
    c.rule = config->rule;
  } else {
    c.seed = run.design.replay_seed;
  }
  r.moments = run.moments;
  r.evidence = run.evidence;
  r.rss_trace = run.trace.rss;
  r.rne_trace = run.trace.m_iterations;
  r.cycles = run.trace.cycles;
  r.cycle_count = run.cycle_count();
  r.total_sweeps = run.total_sweeps();
  r.pit = run.trace.pit;
  for (const auto& f : model.functions()) {
    if (f.is_test) r.test_functions.push_back(f.name);
  }
  r.timings = run.trace.timings;
  return r;
}

std::string report_to_json(const ReportFile& report) {
  json runs = json::array();
  for (const auto& r : report.runs) runs.push_back(to_json(r));
  json root = {{"format", kFormat}, {"version", kFormatVersion}, {"runs", runs}};
  return root.dump(1) + "\n";
}

ReportFile report_from_json(const std::string& text) {
  try {
    const json root = json::parse(text);
    if (root.at("format").get<std::string>() != kFormat || root.at("version").get<int>() != kFormatVersion) {
      throw SchemaError("not a version " + std::to_string(kFormatVersion) + " report");
    }
    ReportFile out;
    for (const auto& r : root.at("runs")) out.runs.push_back(run_from_json(r));
    return out;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
}

void save_report(const std::string& path, const ReportFile& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open report for writing: " + path);
  out << report_to_json(report);
  if (!out) throw DataError("failed writing report: " + path);
}

ReportFile load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open report: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto report = report_from_json(buffer.str());
  const std::string sidecar = path + ".timings.json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream tin(sidecar);
    try {
      const json t = json::parse(tin);
      const auto& runs = t.at("runs");
      for (std::size_t i = 0; i < report.runs.size() && i < runs.size(); ++i) {
        report.runs[i].timings = {runs[i].at("c_phase").get<double>(), runs[i].at("s_phase").get<double>(),
                                  runs[i].at("m_phase").get<double>()};
      }
    } catch (const json::exception& e) {
      throw SchemaError(std::string("malformed timings sidecar: ") + e.what());
    }
  }
  return report;
}

void write_timings(const std::string& report_path, const ReportFile& report) {
  json runs = json::array();
  for (const auto& r : report.runs) {
    runs.push_back({{"c_phase", r.timings.c_phase},
                    {"s_phase", r.timings.s_phase},
                    {"m_phase", r.timings.m_phase},
                    {"total", r.timings.c_phase + r.timings.s_phase + r.timings.m_phase}});
  }
  std::ofstream out(report_path + ".timings.json");
  if (!out) throw DataError("cannot write timings next to " + report_path);
  out << json{{"runs", runs}}.dump(1) << "\n";
}

void write_trace_csvs(const std::string& prefix, const RunReport& report) {
  {
    std::ofstream out(prefix + ".rss.csv");
    if (!out) throw DataError("cannot write " + prefix + ".rss.csv");
    out << "t,cycle,rss\n" << std::setprecision(17);
    std::size_t cycle = 0;
    for (std::size_t s = 1; s <= report.rss_trace.size(); ++s) {
      while (cycle < report.cycles.size() && report.cycles[cycle].t_end < s) ++cycle;
      out << s << ',' << cycle + 1 << ',' << report.rss_trace[s - 1] << '\n';
    }
  }
  {
    std::ofstream out(prefix + ".rne.csv");
    if (!out) throw DataError("cannot write " + prefix + ".rne.csv");
    out << "cycle,iteration,stepsize,acceptance_rate,mean_rne";
    for (const auto& name : report.test_functions) out << ",rne_" << name;
    out << '\n' << std::setprecision(17);
    for (const auto& it : report.rne_trace) {
      out << it.cycle << ',' << it.iteration << ',' << it.stepsize << ',' << it.acceptance_rate << ','
          << csv_optional(it.mean_rne);
      for (const auto& v : it.rne) out << ',' << csv_optional(v);
      out << '\n';
    }
  }
  if (!report.pit.empty()) {
    std::ofstream out(prefix + ".pit.csv");
    if (!out) throw DataError("cannot write " + prefix + ".pit.csv");
    out << "t,pit\n" << std::setprecision(17);
    for (std::size_t s = 1; s <= report.pit.size(); ++s) out << s << ',' << report.pit[s - 1] << '\n';
  }
}

void render_report(std::ostream& out, const ReportFile& report) {
  const auto flags = out.flags();
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    const auto& c = r.config;
    out << "run " << i + 1 << " (" << c.mode << "): " << c.model_id << "  J=" << c.J << " N=" << c.N
        << " T=" << c.T << " seed=" << c.seed << '\n';
    out << std::fixed << std::setprecision(4);
    out << "  cycles " << r.cycle_count << "  metropolis steps " << r.total_sweeps << '\n';
    out << "  log ML " << r.evidence.log_ml << " (NSE " << r.evidence.log_ml_nse << ")  log ML [product form] "
        << r.evidence.log_ml_tilde << '\n';
    if (r.evidence.log_score) {
      out << "  log score " << *r.evidence.log_score << " (NSE " << r.evidence.log_score_nse.value_or(0.0)
          << ", burn-in " << r.evidence.burn_in.value_or(0) << ")\n";
    }
    out << "  " << std::left << std::setw(24) << "function" << std::right << std::setw(8) << "t"
        << std::setw(14) << "mean" << std::setw(14) << "sd" << std::setw(14) << "nse" << std::setw(10)
        << "rne" << '\n';
    for (const auto& m : r.moments) {
      out << "  " << std::left << std::setw(24) << m.name << std::right << std::setw(8) << m.t
          << std::setw(14) << m.mean << std::setw(14) << m.sd << std::setw(14) << m.nse << std::setw(10);
      if (m.rne) {
        out << *m.rne;
      } else {
        out << "n/a";
      }
      out << '\n';
    }
    out.flags(flags);
  }
}

}  // namespace spsim
