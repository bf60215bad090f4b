#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "trendvol/market_data.hpp"
#include "trendvol/scheme.hpp"

namespace trendvol::testing {

inline Date ymd(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> uniform_sample(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

/// Daily panel built directly from columns, weekday dates from 2010-01-04.
inline FeaturePanel make_panel(const Eigen::MatrixXd& values, std::vector<std::string> names) {
  FeaturePanel p;
  p.values = values;
  p.feature_order = std::move(names);
  Date d = ymd(2010, 1, 4);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    p.dates.push_back(d);
    d = next_weekday(d);
  }
  return p;
}

/// Random stationary panel with columns (r, sigma, t0, t1, ...).
inline FeaturePanel random_panel(Eigen::Index rows, int n_trends, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd v(rows, 2 + n_trends);
  for (Eigen::Index i = 0; i < rows; ++i) {
    v(i, 0) = 0.01 * z(rng);
    v(i, 1) = 0.01 * std::exp(0.3 * z(rng));
    for (int j = 0; j < n_trends; ++j) v(i, 2 + j) = std::exp(0.2 * z(rng));
  }
  std::vector<std::string> names{"r", "sigma"};
  for (int j = 0; j < n_trends; ++j) names.push_back("t" + std::to_string(j));
  return make_panel(v, names);
}

}  // namespace trendvol::testing
