#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spsim/mutation.hpp"
#include "spsim/resampling.hpp"

namespace spsim {

inline constexpr std::uint64_t kDesignSchemaVersion = 1;

/// One cycle of a frozen design: where the C phase stopped, whether S and M
/// phases ran, and the exact proposals of every Metropolis sweep.
struct DesignCycle {
  std::size_t t_end = 0;
  bool selected = true;
  bool forced = false;
  MutationRecord mutation;
};

/// Everything an adaptive run decided, so a second run can execute the same
/// sequence of cycles nonadaptively with fresh randomness.
struct DesignRecord {
  std::uint64_t schema_version = kDesignSchemaVersion;
  std::string model_id;
  std::size_t J = 0;
  std::size_t N = 0;
  std::size_t k = 0;
  std::size_t T = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t adaptive_seed = 0;
  std::uint64_t replay_seed = 0;
  ResampleScheme scheme = ResampleScheme::residual;
  ProposalKind proposal = ProposalKind::random_walk;
  std::vector<std::size_t> forced_dates;
  std::vector<std::size_t> moment_dates;
  std::vector<DesignCycle> cycles;

  std::size_t total_sweeps() const;
  /// Throws SchemaError unless t_end is strictly increasing and ends at T,
  /// unselected cycles carry no sweeps, and every covariance is k x k.
  void validate() const;
};

/// FNV-1a hash of everything a replay must agree on: model id, J, N, k, the
/// data values, resampling scheme and proposal kind.
std::uint64_t config_hash(const std::string& model_id, std::size_t J, std::size_t N, std::size_t k,
                          std::span<const double> data, ResampleScheme scheme, ProposalKind proposal);

// Byte layout (all integers u64 little-endian, reals IEEE-754 f64 little-endian):
//   "SPSDSGN1" | schema_version | len(model_id) model_id bytes | J | N | k | T
//   | config_hash | adaptive_seed | replay_seed | scheme | proposal
//   | n_forced forced[n] | n_moment moment[n] | L
//   | L x ( t_end | flags (bit0 selected, bit1 forced) | R
//   |       R x ( stepsize | acceptance | covariance k*k row-major
//   |             | mean[k] when proposal == independence ) )
//   | "SPSDEND1"
void write_design(std::ostream& out, const DesignRecord& design);
DesignRecord read_design(std::istream& in);

void save_design(const std::string& path, const DesignRecord& design);
DesignRecord load_design(const std::string& path);

}  // namespace spsim
