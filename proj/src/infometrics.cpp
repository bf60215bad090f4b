#include "trendvol/infometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "trendvol/error.hpp"
#include "trendvol/text.hpp"

namespace trendvol {

int QuantileBins::bin_of(double x) const {
  return static_cast<int>(std::upper_bound(thresholds.begin(), thresholds.end(), x) - thresholds.begin());
}

QuantileBins quantile_bins(std::span<const double> x, int n_bins) {
  if (n_bins < 2) throw std::invalid_argument("quantile_bins: n_bins must be >= 2");
  if (x.size() < static_cast<std::size_t>(n_bins)) throw std::invalid_argument("quantile_bins: fewer samples than bins");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  QuantileBins bins;
  bins.requested = n_bins;
  for (int j = 1; j < n_bins; ++j) {
    const std::size_t m = static_cast<std::size_t>(j) * n / static_cast<std::size_t>(n_bins);
    const double t = s[m];
    if (t <= s.front()) continue;
    if (!bins.thresholds.empty() && t <= bins.thresholds.back()) continue;
    bins.thresholds.push_back(t);
    bins.edges.push_back(0.5 * (s[m - 1] + s[m]));
  }
  bins.effective = static_cast<int>(bins.thresholds.size()) + 1;
  return bins;
}

MiEstimate mutual_information(std::span<const double> x, std::span<const double> y, int n_bins,
                              BiasCorrection correction) {
  if (x.size() != y.size()) throw std::invalid_argument("mutual_information: length mismatch");
  if (n_bins < 2) throw std::invalid_argument("mutual_information: n_bins must be >= 2");
  const std::size_t need = static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(n_bins);
  if (x.size() < need) throw std::invalid_argument("mutual_information: need at least n_bins^2 samples");

  const auto bx = quantile_bins(x, n_bins);
  const auto by = quantile_bins(y, n_bins);
  const std::size_t n = x.size();
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(bx.effective, by.effective);
  for (std::size_t i = 0; i < n; ++i) joint(bx.bin_of(x[i]), by.bin_of(y[i])) += 1.0;
  const Eigen::VectorXd nx = joint.rowwise().sum();
  const Eigen::RowVectorXd ny = joint.colwise().sum();

  // Terms are sorted before summation so that swapping x and y (a transposed
  // table) reproduces the same bits.
  const double dn = static_cast<double>(n);
  std::vector<double> terms;
  for (Eigen::Index a = 0; a < joint.rows(); ++a)
    for (Eigen::Index b = 0; b < joint.cols(); ++b) {
      const double nab = joint(a, b);
      if (nab > 0.0) terms.push_back(nab / dn * std::log((dn * nab) / (nx(a) * ny(b))));
    }
  std::sort(terms.begin(), terms.end());
  double mi = std::accumulate(terms.begin(), terms.end(), 0.0);

  if (correction == BiasCorrection::MillerMadow) {
    const auto occupied_x = static_cast<double>((nx.array() > 0.0).count());
    const auto occupied_y = static_cast<double>((ny.array() > 0.0).count());
    mi += (occupied_x + occupied_y - static_cast<double>(terms.size()) - 1.0) / (2.0 * dn);
  }

  MiEstimate est;
  est.value = std::clamp(mi, 0.0, std::log(static_cast<double>(n_bins)));
  est.n_samples = n;
  est.n_bins = n_bins;
  est.undersampled = n < 5 * need;
  return est;
}

std::string to_string(TargetKind kind) { return kind == TargetKind::Return ? "return" : "volatility"; }

TargetKind parse_target_kind(std::string_view s) {
  if (s == "return" || s == "r") return TargetKind::Return;
  if (s == "volatility" || s == "sigma") return TargetKind::Volatility;
  throw std::invalid_argument("target must be 'return' or 'volatility'");
}

MiRows scheme_mi_rows(const FeaturePanel& panel, const Scheme& scheme, TargetKind target) {
  validate(scheme);
  const auto agg = aggregate_panel(panel, scheme.dt);
  const Eigen::Index P = agg.periods();
  const Eigen::Index first = scheme.k ? *scheme.k : 0;
  if (P - first < 2) throw std::invalid_argument("scheme_mi_rows: too few periods");

  Eigen::MatrixXd z(P - first, agg.values.cols());
  for (Eigen::Index c = 0; c < agg.values.cols(); ++c) z.col(c) = zscore(agg.values.col(c), scheme.k).values;
  const Eigen::Index target_col =
      panel.column_index(target == TargetKind::Return ? kReturnColumn : kSigmaColumn);

  MiRows rows;
  const Eigen::Index n = z.rows() - 1;
  rows.features = z.topRows(n);
  rows.target = z.col(target_col).tail(n);
  rows.feature_order = agg.feature_order;
  return rows;
}

PanelMi panel_mi(const Eigen::Ref<const Eigen::MatrixXd>& features, const Eigen::Ref<const Eigen::VectorXd>& target,
                 int n_bins, BiasCorrection correction) {
  if (features.rows() != target.size()) throw std::invalid_argument("panel_mi: row mismatch");
  PanelMi out;
  out.n_samples = static_cast<std::size_t>(target.size());
  if (out.n_samples < static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(n_bins)) return out;
  const Eigen::VectorXd y = target;
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const Eigen::VectorXd x = features.col(c);
    const double v = mutual_information(std::span(x.data(), x.size()), std::span(y.data(), y.size()), n_bins,
                                        correction)
                         .value;
    out.per_feature.push_back(v);
    out.sum += v;
  }
  out.feasible = true;
  return out;
}

PanelMi scheme_mi(const FeaturePanel& panel, const Scheme& scheme, TargetKind target, int n_bins) {
  MiRows rows;
  try {
    rows = scheme_mi_rows(panel, scheme, target);
  } catch (const std::invalid_argument&) {
    return PanelMi{};
  } catch (const std::domain_error&) {
    return PanelMi{};
  }
  return panel_mi(rows.features, rows.target, n_bins);
}

std::vector<int> default_dt_grid() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::vector<std::optional<int>> default_k_grid() { return {5, 10, 20, 30, 60, 120, std::nullopt}; }

MiGrid scan_grid(const FeaturePanel& train_panel, const std::vector<int>& dt_values,
                 const std::vector<std::optional<int>>& k_values, TargetKind target, int n_bins) {
  if (dt_values.empty() || k_values.empty()) throw std::invalid_argument("scan_grid: empty grid axis");
  MiGrid grid;
  grid.dt_values = dt_values;
  grid.k_values = k_values;
  grid.target = target;
  const auto rows = static_cast<Eigen::Index>(dt_values.size());
  const auto cols = static_cast<Eigen::Index>(k_values.size());
  grid.values = Eigen::MatrixXd::Constant(rows, cols, std::numeric_limits<double>::quiet_NaN());
  grid.n_samples = Eigen::MatrixXi::Zero(rows, cols);
  grid.feasible = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, false);
  bool any = false;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Scheme scheme{dt_values[static_cast<std::size_t>(i)], k_values[static_cast<std::size_t>(j)]};
      validate(scheme);
      const auto cell = scheme_mi(train_panel, scheme, target, n_bins);
      grid.n_samples(i, j) = static_cast<int>(cell.n_samples);
      grid.feasible(i, j) = cell.feasible;
      if (cell.feasible) {
        grid.values(i, j) = cell.sum;
        any = true;
      }
    }
  if (!any) throw InfeasibleScheme("scan_grid: every (dt, k) cell is infeasible");
  return grid;
}

namespace {

// Infinite k compares as the largest window.
bool k_larger(const std::optional<int>& a, const std::optional<int>& b) {
  if (!a) return b.has_value();
  if (!b) return false;
  return *a > *b;
}

}  // namespace

Scheme select_scheme(const MiGrid& grid, std::size_t min_samples) {
  std::optional<Scheme> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i)
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      if (!grid.feasible(i, j) || static_cast<std::size_t>(grid.n_samples(i, j)) < min_samples) continue;
      const Scheme cand{grid.dt_values[static_cast<std::size_t>(i)], grid.k_values[static_cast<std::size_t>(j)]};
      const double v = grid.values(i, j);
      bool take = !best || v > best_value;
      if (best && v == best_value)
        take = cand.dt < best->dt || (cand.dt == best->dt && k_larger(cand.k, best->k));
      if (take) {
        best = cand;
        best_value = v;
      }
    }
  if (!best) throw InfeasibleScheme("select_scheme: no feasible cell with at least " + std::to_string(min_samples) + " samples");
  return *best;
}

FeatureRanking rank_features(const FeaturePanel& panel, const Scheme& scheme, TargetKind target, int n_bins,
                             std::size_t top_n) {
  const auto mi = scheme_mi(panel, scheme, target, n_bins);
  if (!mi.feasible) throw InfeasibleScheme("rank_features: scheme infeasible on this panel");
  FeatureRanking ranking;
  for (std::size_t i = 0; i < mi.per_feature.size(); ++i) ranking.push_back({panel.feature_order[i], mi.per_feature[i]});
  std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) { return a.mi > b.mi; });
  if (ranking.size() > top_n) ranking.resize(top_n);
  return ranking;
}

std::string grid_csv(const MiGrid& grid) {
  std::string out = "dt,k,mi_sum,n_samples,feasible\n";
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i)
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      out += std::to_string(grid.dt_values[static_cast<std::size_t>(i)]) + "," +
             format_k(grid.k_values[static_cast<std::size_t>(j)]) + "," +
             (grid.feasible(i, j) ? text::format_double(grid.values(i, j)) : std::string("nan")) + "," +
             std::to_string(grid.n_samples(i, j)) + "," + (grid.feasible(i, j) ? "1" : "0") + "\n";
    }
  return out;
}

std::string ranking_csv(const FeatureRanking& ranking) {
  std::string out = "rank,feature,mi\n";
  for (std::size_t i = 0; i < ranking.size(); ++i)
    out += std::to_string(i + 1) + "," + ranking[i].name + "," + text::format_double(ranking[i].mi) + "\n";
  return out;
}

}  // namespace trendvol
