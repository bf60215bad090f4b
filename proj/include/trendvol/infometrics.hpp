#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trendvol/market_data.hpp"
#include "trendvol/scheme.hpp"

namespace trendvol {

/// Equal-frequency bins. A sample x falls in bin `#{t in thresholds : x >= t}`.
/// Thresholds are sample values, so assignment depends only on ranks.
struct QuantileBins {
  std::vector<double> thresholds;  // strictly increasing, each > min(x)
  std::vector<double> edges;       // midpoints between the neighbouring order statistics
  int requested = 0;
  int effective = 0;               // thresholds.size() + 1
  bool merged() const noexcept { return effective < requested; }

  int bin_of(double x) const;
};

QuantileBins quantile_bins(std::span<const double> x, int n_bins);

enum class BiasCorrection { None, MillerMadow };

struct MiEstimate {
  double value = 0.0;  // nats
  std::size_t n_samples = 0;
  int n_bins = 0;
  bool undersampled = false;  // n_samples < 5 * n_bins^2
};

MiEstimate mutual_information(std::span<const double> x, std::span<const double> y, int n_bins,
                              BiasCorrection correction = BiasCorrection::None);

enum class TargetKind { Return, Volatility };

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(std::string_view text);

/// Period-aligned MI rows of a scheme: features at period i, target at i + 1,
/// both z-scored under the scheme.
struct MiRows {
  Eigen::MatrixXd features;
  Eigen::VectorXd target;
  std::vector<std::string> feature_order;
};

MiRows scheme_mi_rows(const FeaturePanel& panel, const Scheme& scheme, TargetKind target);

struct PanelMi {
  std::vector<double> per_feature;
  double sum = 0.0;
  std::size_t n_samples = 0;
  bool feasible = false;
};

/// Per-column MI against the target plus their sum. Fewer than n_bins^2 rows
/// marks the result infeasible instead of throwing.
PanelMi panel_mi(const Eigen::Ref<const Eigen::MatrixXd>& features, const Eigen::Ref<const Eigen::VectorXd>& target,
                 int n_bins, BiasCorrection correction = BiasCorrection::None);

PanelMi scheme_mi(const FeaturePanel& panel, const Scheme& scheme, TargetKind target, int n_bins);

struct MiGrid {
  std::vector<int> dt_values;
  std::vector<std::optional<int>> k_values;
  Eigen::MatrixXd values;  // |dt| x |k| summed MI; NaN where infeasible
  Eigen::MatrixXi n_samples;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;
  TargetKind target = TargetKind::Volatility;
};

std::vector<int> default_dt_grid();
std::vector<std::optional<int>> default_k_grid();

MiGrid scan_grid(const FeaturePanel& train_panel, const std::vector<int>& dt_values,
                 const std::vector<std::optional<int>>& k_values, TargetKind target, int n_bins);

/// Argmax of summed MI over feasible cells with at least `min_samples` rows;
/// ties go to the smaller dt, then the larger k.
Scheme select_scheme(const MiGrid& grid, std::size_t min_samples);

struct RankedFeature {
  std::string name;
  double mi = 0.0;
};

using FeatureRanking = std::vector<RankedFeature>;

FeatureRanking rank_features(const FeaturePanel& panel, const Scheme& scheme, TargetKind target, int n_bins,
                             std::size_t top_n);

std::string grid_csv(const MiGrid& grid);
std::string ranking_csv(const FeatureRanking& ranking);

}  // namespace trendvol
