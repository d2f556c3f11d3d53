#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spsim/diagnostics.hpp"
#include "spsim/engine.hpp"

namespace spsim {

/// Settings echoed into every report.
struct ConfigEcho {
  std::string mode;  // adaptive | nonadaptive
  std::string model_id;
  std::size_t J = 0;
  std::size_t N = 0;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  std::uint64_t design_hash = 0;
  double rss_threshold = 0.5;
  MPhaseRule rule;
  std::string resampler;
  std::string proposal;
  std::vector<std::size_t> forced_dates;
  std::vector<std::size_t> moment_dates;
  std::optional<std::size_t> burn_in;

  friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

/// Everything a run reports. Timings are kept out of the report file itself
/// (see write_timings) so that the file is a pure function of the inputs.
struct RunReport {
  ConfigEcho config;
  std::vector<MomentReport> moments;
  EvidenceReport evidence;
  std::vector<double> rss_trace;
  std::vector<MIterationTrace> rne_trace;
  std::vector<CycleSummary> cycles;
  std::size_t cycle_count = 0;
  std::size_t total_sweeps = 0;
  std::vector<double> pit;
  std::vector<std::string> test_functions;
  PhaseTimings timings;
};

/// A report file holds one run (run, replay) or two (hybrid: adaptive then replay).
struct ReportFile {
  std::vector<RunReport> runs;
};

RunReport make_report(const RunResult& run, std::string mode, const EngineConfig* config,
                      const Model& model);

std::string report_to_json(const ReportFile& report);
ReportFile report_from_json(const std::string& text);

void save_report(const std::string& path, const ReportFile& report);
/// Also reads the timings sidecar when one exists next to the report.
ReportFile load_report(const std::string& path);

/// Per-phase timings sidecar: <report path>.timings.json.
void write_timings(const std::string& report_path, const ReportFile& report);

/// CSV traces next to the report: <prefix>.rss.csv, <prefix>.rne.csv and,
/// when PIT was computed, <prefix>.pit.csv.
void write_trace_csvs(const std::string& prefix, const RunReport& report);

/// Human-readable summary: cycles, sweeps, log ML, log score, moments.
void render_report(std::ostream& out, const ReportFile& report);

}  // namespace spsim
