#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spsim/particles.hpp"
#include "spsim/rng.hpp"

namespace spsim {

/// Selection schemes for the S phase. Residual is the default. Stratified and
/// systematic are experimental: no CLT theory covers them in this setting.
enum class ResampleScheme : std::uint8_t { multinomial = 0, residual = 1, stratified = 2, systematic = 3 };

std::string_view to_string(ResampleScheme scheme);
ResampleScheme parse_resample_scheme(std::string_view name);

/// Draws N ancestor indices for one group from nonnegative (unnormalized)
/// weights. Every scheme is unbiased: the expected copy count of particle n is
/// N * w_n / sum(w). Residual guarantees at least floor(N * w_n / sum(w))
/// copies. Returned indices are ascending.
std::vector<std::size_t> resample_group(std::span<const double> weights, ResampleScheme scheme,
                                        RandomStream& stream);

/// Resamples every group independently (one stream per group and cycle),
/// copying theta, state and cached log-likelihood by ancestry, then resets all
/// log weights to zero.
void s_phase(ParticleSystem& system, ResampleScheme scheme, std::uint64_t master_seed);

}  // namespace spsim
