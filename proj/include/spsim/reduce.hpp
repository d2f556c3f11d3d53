#pragma once

#include <cstddef>
#include <span>

namespace spsim {

// All reductions over particle populations go through these helpers so the
// result does not depend on how per-particle work was scheduled. Sums use a
// fixed pairwise tree (block size 8), which also bounds rounding growth to
// O(log n).

double tree_sum(std::span<const double> values);

/// log(sum(exp(x))). Returns -inf for an empty span or when every entry is -inf.
double log_sum_exp(std::span<const double> log_values);

/// log(mean(exp(x))).
double log_mean_exp(std::span<const double> log_values);

}  // namespace spsim
