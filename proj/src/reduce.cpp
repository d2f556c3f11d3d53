#include "spsim/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace spsim {

namespace {

constexpr std::size_t kLeafSize = 8;

double tree_sum_impl(const double* first, std::size_t n) {
  if (n <= kLeafSize) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += first[i];
    return s;
  }
  const std::size_t half = n / 2;
  return tree_sum_impl(first, half) + tree_sum_impl(first + half, n - half);
}

}  // namespace

double tree_sum(std::span<const double> values) {
  return tree_sum_impl(values.data(), values.size());
}

double log_sum_exp(std::span<const double> log_values) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (log_values.empty()) return kNegInf;
  const double m = *std::max_element(log_values.begin(), log_values.end());
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  std::vector<double> shifted(log_values.size());
  std::transform(log_values.begin(), log_values.end(), shifted.begin(),
                 [m](double x) { return std::exp(x - m); });
  return m + std::log(tree_sum(shifted));
}

double log_mean_exp(std::span<const double> log_values) {
  return log_sum_exp(log_values) - std::log(static_cast<double>(log_values.size()));
}

}  // namespace spsim
