#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spsim {

enum class SeriesKind { prices, returns };

SeriesKind parse_series_kind(std::string_view name);

/// Reads one number per row. A non-numeric first row is taken as a header.
/// Prices become log returns, so T is one less than the number of rows.
/// Throws DataError (with the 1-based line number) on malformed input or T=0.
std::vector<double> ingest_series(const std::string& path, SeriesKind kind);

/// Parses text in the same format as ingest_series; `source` is used in messages.
std::vector<double> parse_series(std::string_view text, SeriesKind kind,
                                 const std::string& source = "<input>");

/// Writes "y" header then one value per line at 17 significant digits.
void write_series(const std::string& path, std::span<const double> y);

}  // namespace spsim
