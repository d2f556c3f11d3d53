#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace spsim {

/// Which part of the algorithm consumes a stream.
enum class Phase : std::uint8_t { init = 0, C = 1, S = 2, M = 3, aux = 4 };

/// Identifies one independent random stream.
///
/// Every (group, particle, phase, cycle, iteration) tuple under a master seed
/// maps to its own stream, so the draws a particle sees never depend on how
/// work is scheduled across threads.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint32_t group = 0;
  std::uint32_t particle = 0;
  Phase phase = Phase::init;
  std::uint32_t cycle = 0;
  std::uint64_t iteration = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// splitmix64 finalizer; used to fold key fields into the Philox key.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based generator for one StreamKey.
///
/// The Philox key is a hash of (master_seed, phase, cycle, iteration); the
/// group and particle indices occupy two words of the counter directly, so
/// streams that differ only in group or particle never share a block.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(const StreamKey& key);

  /// Next raw 64 bits.
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // UniformRandomBitGenerator, so std:: algorithms can consume the stream.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  PhiloxKey key_{};
  std::uint32_t group_ = 0;
  std::uint32_t particle_ = 0;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  std::optional<double> spare_normal_;
};

inline RandomStream stream_for(const StreamKey& key) { return RandomStream(key); }

}  // namespace spsim
