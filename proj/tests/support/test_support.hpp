#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "spsim/rng.hpp"

namespace spsim::testing {

inline std::vector<double> normal_series(std::size_t T, std::uint64_t seed, double mean = 0.0,
                                         double sd = 1.0) {
  RandomStream s({seed, 0, 0, Phase::aux, 99, 0});
  std::vector<double> y(T);
  for (auto& v : y) v = mean + sd * s.normal();
  return y;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Asymptotic Kolmogorov distribution tail P(K > x).
inline double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, sum));
}

// One-sample KS test against U(0,1); returns the p-value.
inline double ks_uniform_pvalue(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::max((i + 1) / n - u[i], u[i] - i / n));
  }
  const double sn = std::sqrt(n);
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spsim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace spsim::testing
