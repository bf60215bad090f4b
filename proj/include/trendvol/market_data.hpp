#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trendvol/calendar.hpp"

namespace trendvol {

struct OhlcBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double adj_close = 0.0;
};

/// Validates price positivity and high/low consistency; throws DataError.
void validate_bar(const OhlcBar& bar);

/// Bars sorted by strictly increasing date.
class OhlcSeries {
 public:
  OhlcSeries() = default;
  /// Sorts by date; rejects duplicate dates and invalid bars.
  explicit OhlcSeries(std::vector<OhlcBar> bars);

  std::span<const OhlcBar> bars() const noexcept { return bars_; }
  std::size_t size() const noexcept { return bars_.size(); }
  const OhlcBar& operator[](std::size_t i) const { return bars_[i]; }

 private:
  std::vector<OhlcBar> bars_;
};

struct TrendSeries {
  std::string name;
  std::vector<Date> dates;
  std::vector<double> values;
};

struct DatedValue {
  Date date;
  double value = 0.0;
};

struct VolEstimate {
  double u = 0.0;
  double d = 0.0;
  double c = 0.0;
  double sigma = 0.0;
  bool clamped = false;  // the quadratic form came out negative and was set to 0
};

/// Canonical names of the two market columns of the feature panel.
inline constexpr std::string_view kReturnColumn = "r";
inline constexpr std::string_view kSigmaColumn = "sigma";

/// Daily aligned feature matrix: one row per trading day, columns ordered
/// (r, sigma, trends...).
struct FeaturePanel {
  std::vector<Date> dates;
  Eigen::MatrixXd values;
  std::vector<std::string> feature_order;
  std::int64_t clamped_days = 0;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }
  /// Column index by name; accepts "return"/"volatility" as aliases of r/sigma.
  Eigen::Index column_index(std::string_view name) const;
  /// Rows [begin, end).
  FeaturePanel slice(Eigen::Index begin, Eigen::Index end) const;
  /// Column subset in the given order (r and sigma need not be kept).
  FeaturePanel select(std::span<const std::string> names) const;
};

struct AdfResult {
  double test_statistic = 0.0;
  double p_value = 1.0;
  int lag_order = 0;
  bool stationary_at_5pct = false;
};

struct SynthConfig {
  int n_days = 3000;
  int n_trends = 23;
  int n_coupled = 4;
  double gamma = 0.8;
  std::uint64_t seed = 42;
  double garch_omega = 5e-6;
  double garch_alpha = 0.85;  // persistence on the lagged variance
  double garch_beta = 0.1;    // loading on the lagged squared return
};

struct SynthData {
  OhlcSeries ohlc;
  std::vector<TrendSeries> trends;
  std::vector<std::string> coupled;  // names of trends carrying planted signal
};

// -- parsing ------------------------------------------------------------------

OhlcSeries parse_ohlc(std::string_view csv_text);
std::vector<TrendSeries> parse_trends(std::string_view csv_text);

std::string write_ohlc_csv(const OhlcSeries& series);
std::string write_trends_csv(const std::vector<TrendSeries>& trends);

/// Parses the flat `key = value` synthetic config. Unknown keys are errors.
SynthConfig parse_synth_config(std::string_view text);
void validate(const SynthConfig& config);

// -- estimators -----------------------------------------------------------------

/// Log returns of the adjusted close; output has one entry per bar after the first.
std::vector<DatedValue> daily_returns(const OhlcSeries& series);

/// Garman-Klass quadratic form in the log ratios u = ln(H/O), d = ln(L/O), c = ln(C/O).
template <typename Scalar>
Scalar garman_klass_variance(Scalar u, Scalar d, Scalar c) {
  const Scalar ud = u - d;
  return Scalar(0.511) * ud * ud - Scalar(0.019) * (c * (u + d) - Scalar(2) * u * d) -
         Scalar(0.383) * c * c;
}

VolEstimate garman_klass(const OhlcBar& bar);

// -- panel ----------------------------------------------------------------------

/// Inner join of OHLC and trends on the date range every trend covers. Trend
/// dates outside the trading calendar are ignored; a trading day missing from
/// any trend inside the range is a DataError.
FeaturePanel assemble_panel(const OhlcSeries& ohlc, const std::vector<TrendSeries>& trends);

/// Chronological split: train keeps floor(n * fraction) rows.
std::pair<FeaturePanel, FeaturePanel> split_train_test(const FeaturePanel& panel,
                                                       double train_fraction);

/// Schwert rule floor(12 * (n/100)^(1/4)).
int schwert_max_lag(std::size_t n);

/// Augmented Dickey-Fuller with constant; lag order by AIC over 0..max_lag.
AdfResult adf_test(std::span<const double> x, int max_lag);
inline AdfResult adf_test(std::span<const double> x) { return adf_test(x, schwert_max_lag(x.size())); }

/// MacKinnon (1994) approximate p-value, constant-only regression, one variable.
double mackinnon_pvalue(double tau);

// -- synthetic data -----------------------------------------------------------

/// Trend abbreviations used for synthetic columns (cycled with a suffix when
/// more are requested).
std::span<const std::string_view> trend_abbreviations();

SynthData synth_generate(const SynthConfig& config);

}  // namespace trendvol
