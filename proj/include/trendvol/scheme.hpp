#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trendvol/market_data.hpp"

namespace trendvol {

/// Observation/normalization scheme (dt, k). `k` counts aggregated periods in
/// the look-back window; nullopt is the infinite window (training-set
/// standardization).
struct Scheme {
  int dt = 1;
  std::optional<int> k;

  bool infinite_k() const noexcept { return !k.has_value(); }
  friend bool operator==(const Scheme&, const Scheme&) = default;
};

void validate(const Scheme& scheme);

/// "inf" for the infinite window, otherwise the integer.
std::string format_k(const std::optional<int>& k);
std::optional<int> parse_k(std::string_view text);

enum class AggregationKind { ReturnSum, TrendMean, VolRms };

/// Non-overlapping dt-day periods; the trailing partial period is dropped.
Eigen::VectorXd aggregate(const Eigen::Ref<const Eigen::VectorXd>& daily, int dt, AggregationKind kind);

/// Aggregation kind implied by a panel column name.
AggregationKind aggregation_kind_for(std::string_view column);

struct AggregatedPanel {
  int dt = 1;
  Eigen::MatrixXd values;  // periods x features, raw units
  std::vector<std::string> feature_order;
  std::vector<Date> period_end;

  Eigen::Index periods() const noexcept { return values.rows(); }
};

AggregatedPanel aggregate_panel(const FeaturePanel& panel, int dt);

/// y_i = sigma_{i+1}.
Eigen::VectorXd build_target(const Eigen::Ref<const Eigen::VectorXd>& sigma_agg);

struct ZStats {
  double mean = 0.0;
  double std = 1.0;
};

/// Sample mean and sample standard deviation (n - 1 denominator).
ZStats sample_stats(const Eigen::Ref<const Eigen::VectorXd>& x);

/// `values(j)` is the z-score of `x(first + j)`.
struct ZScored {
  Eigen::VectorXd values;
  Eigen::Index first = 0;
};

/// Finite k: each point is standardized by the k points strictly before it;
/// the first k outputs are dropped. Infinite k: a fixed linear transform by
/// `train_stats`, or by the series' own stats when none are given.
ZScored zscore(const Eigen::Ref<const Eigen::VectorXd>& x, const std::optional<int>& k,
               const std::optional<ZStats>& train_stats = std::nullopt);

struct SampleWindow {
  Eigen::MatrixXd inputs;     // lag_len x n_features z-scores, oldest row first
  Eigen::VectorXd raw_sigma;  // observed sigma per window row (teacher forcing)
  double seed_sigma = 0.0;    // observed sigma of the period before the window
  double target = 0.0;        // observed sigma of the period after the window
  Eigen::Index end_period = 0;  // last input period, indexed within its own panel
  Eigen::Index first_day = 0;   // daily row span covered by inputs and target,
  Eigen::Index last_day = 0;    // indexed in the concatenated train+test panel
  Date end_date;
};

struct NormalizationStats {
  std::optional<int> k;
  Eigen::VectorXd mean;  // per feature; empty for finite k
  Eigen::VectorXd std;
};

struct SchemeDataset {
  Scheme scheme;
  int lag_len = 10;
  std::vector<std::string> feature_order;
  NormalizationStats stats;
  double target_scale = 1.0;  // targets and sigmas were divided by this
  std::vector<SampleWindow> windows;

  Eigen::Index n_features() const noexcept { return static_cast<Eigen::Index>(feature_order.size()); }
  std::size_t size() const noexcept { return windows.size(); }
  Eigen::VectorXd targets() const;
};

struct SchemeOptions {
  int lag_len = 10;
  /// Input columns; empty keeps every panel column. Targets always come from sigma.
  std::vector<std::string> features;
  /// Divide targets and sigmas by the mean training target (MAPE is unaffected).
  bool normalize_target = false;
};

/// Builds train and test windows. All normalization statistics come from the
/// training panel; finite-k test z-scores look back into the training tail.
std::pair<SchemeDataset, SchemeDataset> apply_scheme(const FeaturePanel& train, const FeaturePanel& test,
                                                     const Scheme& scheme, const SchemeOptions& options = {});

/// Single-panel variant (no test side); used by model selection on training data.
SchemeDataset apply_scheme(const FeaturePanel& train, const Scheme& scheme, const SchemeOptions& options = {});

/// Column names `<feature>_lag<j>`, j = 1 the most recent period, lag-major.
std::vector<std::string> lag_column_names(const std::vector<std::string>& features, int lag_len);

std::string dataset_csv(const SchemeDataset& dataset);
std::string dataset_sidecar_json(const SchemeDataset& dataset);

}  // namespace trendvol
