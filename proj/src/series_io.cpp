#include "spsim/series_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "spsim/error.hpp"

namespace spsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Accepts a single field; a trailing comma-separated remainder is rejected.
bool parse_number(std::string_view field, double& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto result = std::from_chars(field.data(), end, out);
  return result.ec == std::errc() && result.ptr == end;
}

}  // namespace

SeriesKind parse_series_kind(std::string_view name) {
  if (name == "prices") return SeriesKind::prices;
  if (name == "returns") return SeriesKind::returns;
  throw UsageError("unknown data kind '" + std::string(name) + "' (expected prices or returns)");
}

std::vector<double> parse_series(std::string_view text, SeriesKind kind, const std::string& source) {
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    double v = 0.0;
    if (!parse_number(line, v)) {
      if (line_no == 1) continue;  // header
      throw DataError(source + ":" + std::to_string(line_no) + ": not a number: '" + std::string(line) + "'");
    }
    if (!std::isfinite(v)) {
      throw DataError(source + ":" + std::to_string(line_no) + ": value is not finite");
    }
    if (kind == SeriesKind::prices && !(v > 0.0)) {
      throw DataError(source + ":" + std::to_string(line_no) + ": prices must be positive");
    }
    values.push_back(v);
  }
  if (kind == SeriesKind::prices) {
    std::vector<double> returns;
    for (std::size_t i = 1; i < values.size(); ++i) returns.push_back(std::log(values[i] / values[i - 1]));
    values = std::move(returns);
  }
  if (values.empty()) throw DataError(source + ": series has no observations");
  return values;
}

std::vector<double> ingest_series(const std::string& path, SeriesKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_series(buffer.str(), kind, path);
}

void write_series(const std::string& path, std::span<const double> y) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "y\n" << std::setprecision(17);
  for (double v : y) out << v << '\n';
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace spsim
