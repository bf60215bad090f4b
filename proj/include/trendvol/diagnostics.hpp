#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace trendvol {

/// Residuals are prediction - target. residual_std uses the n - 1
/// denominator, so rmse^2 = mean^2 + std^2 * (n - 1) / n.
struct Metrics {
  double mape = 0.0;  // percent
  double rmse = 0.0;
  std::size_t n = 0;
  double residual_mean = 0.0;
  double residual_std = 0.0;
};

Metrics compute_metrics(std::span<const double> predictions, std::span<const double> targets);

struct AcfResult {
  std::vector<int> lags;  // 1..max_lag
  std::vector<double> acf;
  std::vector<double> pacf;
  double band = 0.0;  // 2 / sqrt(n)
  std::vector<int> significant_lags;  // |acf| > band
};

/// Sample ACF (denominator n) and Durbin-Levinson PACF.
AcfResult acf_pacf(std::span<const double> x, int max_lag = 20);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject_at_1pct = false;
  int mc_reps = 0;
};

/// Kolmogorov-Smirnov distance to the normal with the sample's own mean and std.
double lilliefors_statistic(std::span<const double> x);

/// Lilliefors normality test; the p-value is the Monte-Carlo tail frequency
/// (count + 1) / (reps + 1) over normal samples of the same size.
KsResult lilliefors_test(std::span<const double> x, int mc_reps = 10000, std::uint64_t seed = 0);

struct ModelPredictions {
  std::string name;
  std::vector<double> predictions;
};

struct ModelEntry {
  std::string name;
  Metrics metrics;
};

struct ModelReport {
  std::vector<ModelEntry> models;
  std::vector<double> targets;
  std::vector<ModelPredictions> predictions;
  std::string best_model;  // lowest MAPE
  /// (best MAPE vs other model) relative reduction, (other - best) / other, per other model.
  std::vector<std::pair<std::string, double>> relative_mape_reduction;
  AcfResult best_acf;
  KsResult best_normality;
};

/// (baseline - candidate) / baseline.
double relative_reduction(double candidate, double baseline);

ModelReport build_report(const std::vector<ModelPredictions>& models, std::span<const double> targets,
                         int max_lag = 20, int mc_reps = 10000, std::uint64_t seed = 0);

nlohmann::json report_json(const ModelReport& report);
std::string report_table(const ModelReport& report);

}  // namespace trendvol
