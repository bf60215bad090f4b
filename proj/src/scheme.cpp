#include "trendvol/scheme.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "trendvol/error.hpp"
#include "trendvol/text.hpp"

namespace trendvol {

void validate(const Scheme& scheme) {
  if (scheme.dt < 1) throw std::invalid_argument("scheme: dt must be >= 1");
  if (scheme.k && *scheme.k < 2) throw std::invalid_argument("scheme: finite k must be >= 2");
}

std::string format_k(const std::optional<int>& k) { return k ? std::to_string(*k) : "inf"; }

std::optional<int> parse_k(std::string_view s) {
  s = text::trim(s);
  if (s == "inf" || s == "INF" || s == "infinite") return std::nullopt;
  double v = 0.0;
  if (!text::parse_double(s, v) || v != std::floor(v) || v < 2 || v > 1e9)
    throw std::invalid_argument("k must be an integer >= 2 or 'inf', got '" + std::string(s) + "'");
  return static_cast<int>(v);
}

Eigen::VectorXd aggregate(const Eigen::Ref<const Eigen::VectorXd>& daily, int dt, AggregationKind kind) {
  if (dt < 1) throw std::invalid_argument("aggregate: dt must be >= 1");
  if (daily.size() == 0) throw std::invalid_argument("aggregate: empty series");
  if (daily.size() < dt) throw std::invalid_argument("aggregate: series shorter than dt");
  const Eigen::Index periods = daily.size() / dt;
  Eigen::VectorXd out(periods);
  for (Eigen::Index i = 0; i < periods; ++i) {
    const auto block = daily.segment(i * dt, dt);
    switch (kind) {
      case AggregationKind::ReturnSum: out(i) = block.sum(); break;
      case AggregationKind::TrendMean: out(i) = block.sum() / dt; break;
      case AggregationKind::VolRms: out(i) = std::sqrt(block.squaredNorm()); break;
    }
  }
  return out;
}

AggregationKind aggregation_kind_for(std::string_view column) {
  if (column == kReturnColumn) return AggregationKind::ReturnSum;
  if (column == kSigmaColumn) return AggregationKind::VolRms;
  return AggregationKind::TrendMean;
}

AggregatedPanel aggregate_panel(const FeaturePanel& panel, int dt) {
  if (panel.rows() == 0) throw std::invalid_argument("aggregate_panel: empty panel");
  AggregatedPanel out;
  out.dt = dt;
  out.feature_order = panel.feature_order;
  const Eigen::Index periods = panel.rows() / std::max(dt, 1);
  out.values.resize(periods, panel.cols());
  for (Eigen::Index c = 0; c < panel.cols(); ++c)
    out.values.col(c) =
        aggregate(panel.values.col(c), dt, aggregation_kind_for(panel.feature_order[static_cast<std::size_t>(c)]));
  for (Eigen::Index i = 0; i < periods; ++i) out.period_end.push_back(panel.dates[static_cast<std::size_t>((i + 1) * dt - 1)]);
  return out;
}

Eigen::VectorXd build_target(const Eigen::Ref<const Eigen::VectorXd>& sigma_agg) {
  if (sigma_agg.size() < 2) throw std::invalid_argument("build_target: need at least 2 periods");
  return sigma_agg.tail(sigma_agg.size() - 1);
}

ZStats sample_stats(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() < 2) throw std::invalid_argument("sample_stats: need at least 2 values");
  ZStats s;
  s.mean = x.mean();
  s.std = std::sqrt((x.array() - s.mean).square().sum() / static_cast<double>(x.size() - 1));
  return s;
}

ZScored zscore(const Eigen::Ref<const Eigen::VectorXd>& x, const std::optional<int>& k,
               const std::optional<ZStats>& train_stats) {
  ZScored out;
  if (!k) {
    const ZStats s = train_stats ? *train_stats : sample_stats(x);
    if (!(s.std > 0.0)) throw std::domain_error("zscore: zero standard deviation");
    out.values = (x.array() - s.mean) / s.std;
    out.first = 0;
    return out;
  }
  const int w = *k;
  if (w < 2) throw std::invalid_argument("zscore: window must be >= 2");
  if (x.size() <= w) throw std::invalid_argument("zscore: window larger than series");
  out.first = w;
  out.values.resize(x.size() - w);
  for (Eigen::Index i = w; i < x.size(); ++i) {
    const ZStats s = sample_stats(x.segment(i - w, w));
    if (!(s.std > 0.0)) throw std::domain_error("zscore: zero standard deviation in window ending before index " + std::to_string(i));
    out.values(i - w) = (x(i) - s.mean) / s.std;
  }
  return out;
}

Eigen::VectorXd SchemeDataset::targets() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(windows.size()));
  for (std::size_t i = 0; i < windows.size(); ++i) y(static_cast<Eigen::Index>(i)) = windows[i].target;
  return y;
}

namespace {

struct Side {
  AggregatedPanel agg;
  Eigen::MatrixXd z;        // periods x features; rows before `valid_from` unused
  Eigen::Index valid_from = 0;
  Eigen::Index day_offset = 0;
};

std::vector<std::string> resolve_features(const FeaturePanel& panel, const SchemeOptions& options) {
  if (options.features.empty()) return panel.feature_order;
  std::vector<std::string> out;
  for (const auto& f : options.features)
    out.push_back(panel.feature_order[static_cast<std::size_t>(panel.column_index(f))]);
  return out;
}

void build_windows(const Side& side, Eigen::Index sigma_col, const std::vector<Eigen::Index>& cols,
                   const SchemeDataset& proto, std::vector<SampleWindow>& out) {
  const int L = proto.lag_len;
  const Eigen::Index P = side.agg.periods();
  const Eigen::Index dt = side.agg.dt;
  const Eigen::Index first_start = std::max<Eigen::Index>(side.valid_from, 1);
  for (Eigen::Index e = first_start + L - 1; e + 1 < P; ++e) {
    const Eigen::Index s = e - L + 1;
    SampleWindow w;
    w.inputs.resize(L, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) w.inputs.col(static_cast<Eigen::Index>(c)) = side.z.col(cols[c]).segment(s, L);
    w.raw_sigma = side.agg.values.col(sigma_col).segment(s, L) / proto.target_scale;
    w.seed_sigma = side.agg.values(s - 1, sigma_col) / proto.target_scale;
    w.target = side.agg.values(e + 1, sigma_col) / proto.target_scale;
    w.end_period = e;
    w.first_day = side.day_offset + s * dt;
    w.last_day = side.day_offset + (e + 2) * dt - 1;
    w.end_date = side.agg.period_end[static_cast<std::size_t>(e)];
    out.push_back(std::move(w));
  }
}

}  // namespace

static std::pair<SchemeDataset, SchemeDataset> build(const FeaturePanel& train, const FeaturePanel* test,
                                                     const Scheme& scheme, const SchemeOptions& options) {
  validate(scheme);
  if (options.lag_len < 1) throw std::invalid_argument("apply_scheme: lag_len must be >= 1");
  if (test && test->feature_order != train.feature_order)
    throw std::invalid_argument("apply_scheme: train and test columns differ");
  if (test && !train.dates.empty() && !test->dates.empty() && !(train.dates.back() < test->dates.front()))
    throw std::invalid_argument("apply_scheme: test panel must follow the training panel");
  if (train.rows() < scheme.dt) throw std::invalid_argument("apply_scheme: training panel shorter than dt");

  const auto features = resolve_features(train, options);
  std::vector<Eigen::Index> cols;
  for (const auto& f : features) cols.push_back(train.column_index(f));
  const Eigen::Index sigma_col = train.column_index(kSigmaColumn);

  Side tr;
  tr.agg = aggregate_panel(train, scheme.dt);
  Side te;
  if (test) {
    if (test->rows() < scheme.dt) throw std::invalid_argument("apply_scheme: test panel shorter than dt");
    te.agg = aggregate_panel(*test, scheme.dt);
    te.day_offset = train.rows();
  }

  SchemeDataset proto;
  proto.scheme = scheme;
  proto.lag_len = options.lag_len;
  proto.feature_order = features;
  proto.stats.k = scheme.k;

  if (options.normalize_target) {
    const Eigen::VectorXd y = build_target(tr.agg.values.col(sigma_col));
    proto.target_scale = y.mean();
    if (!(proto.target_scale > 0.0)) throw DataError("apply_scheme: mean training target is not positive");
  }

  const Eigen::Index F = static_cast<Eigen::Index>(features.size());
  tr.z.resize(tr.agg.periods(), train.cols());
  if (test) te.z.resize(te.agg.periods(), train.cols());
  if (scheme.infinite_k()) {
    proto.stats.mean.resize(F);
    proto.stats.std.resize(F);
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
      if (tr.agg.periods() < 2) throw std::invalid_argument("apply_scheme: fewer than 2 training periods");
      const ZStats s = sample_stats(tr.agg.values.col(c));
      if (!(s.std > 0.0))
        throw std::domain_error("apply_scheme: zero-variance feature '" + train.feature_order[static_cast<std::size_t>(c)] + "'");
      tr.z.col(c) = zscore(tr.agg.values.col(c), std::nullopt, s).values;
      if (test) te.z.col(c) = zscore(te.agg.values.col(c), std::nullopt, s).values;
      for (Eigen::Index f = 0; f < F; ++f)
        if (cols[static_cast<std::size_t>(f)] == c) {
          proto.stats.mean(f) = s.mean;
          proto.stats.std(f) = s.std;
        }
    }
  } else {
    const int k = *scheme.k;
    if (tr.agg.periods() <= k) throw std::invalid_argument("apply_scheme: window k exceeds training periods");
    tr.valid_from = k;
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
      const auto z = zscore(tr.agg.values.col(c), k);
      tr.z.col(c).tail(z.values.size()) = z.values;
      tr.z.col(c).head(k).setZero();
    }
    if (test) {
      // Look back into the training tail so the first test periods are usable.
      const Eigen::Index P_tr = tr.agg.periods(), P_te = te.agg.periods();
      Eigen::VectorXd joined(P_tr + P_te);
      for (Eigen::Index c = 0; c < train.cols(); ++c) {
        joined << tr.agg.values.col(c), te.agg.values.col(c);
        const auto z = zscore(joined, k);
        te.z.col(c) = z.values.tail(P_te);
      }
    }
  }

  SchemeDataset train_ds = proto, test_ds = proto;
  build_windows(tr, sigma_col, cols, proto, train_ds.windows);
  if (train_ds.windows.empty()) throw DataError("apply_scheme: training panel too short for one window");
  if (test) {
    build_windows(te, sigma_col, cols, proto, test_ds.windows);
    if (test_ds.windows.empty()) throw DataError("apply_scheme: test panel too short for one window");
  }
  return {std::move(train_ds), std::move(test_ds)};
}

std::pair<SchemeDataset, SchemeDataset> apply_scheme(const FeaturePanel& train, const FeaturePanel& test,
                                                     const Scheme& scheme, const SchemeOptions& options) {
  return build(train, &test, scheme, options);
}

SchemeDataset apply_scheme(const FeaturePanel& train, const Scheme& scheme, const SchemeOptions& options) {
  return build(train, nullptr, scheme, options).first;
}

std::vector<std::string> lag_column_names(const std::vector<std::string>& features, int lag_len) {
  std::vector<std::string> out;
  for (int j = 1; j <= lag_len; ++j)
    for (const auto& f : features) out.push_back(f + "_lag" + std::to_string(j));
  return out;
}

std::string dataset_csv(const SchemeDataset& ds) {
  std::string out = "window_end,period_index,target_sigma";
  for (const auto& name : lag_column_names(ds.feature_order, ds.lag_len)) out += "," + name;
  out += '\n';
  for (const auto& w : ds.windows) {
    out += format_date(w.end_date) + "," + std::to_string(w.end_period) + "," + text::format_double(w.target);
    for (int j = 1; j <= ds.lag_len; ++j)
      for (Eigen::Index f = 0; f < w.inputs.cols(); ++f) out += "," + text::format_double(w.inputs(ds.lag_len - j, f));
    out += '\n';
  }
  return out;
}

std::string dataset_sidecar_json(const SchemeDataset& ds) {
  nlohmann::json j;
  j["scheme"] = {{"dt", ds.scheme.dt}, {"k", format_k(ds.scheme.k)}};
  j["lag_len"] = ds.lag_len;
  j["feature_order"] = ds.feature_order;
  j["target_scale"] = ds.target_scale;
  j["n_windows"] = ds.windows.size();
  nlohmann::json stats = nlohmann::json::object();
  stats["k"] = format_k(ds.stats.k);
  stats["mean"] = std::vector<double>(ds.stats.mean.data(), ds.stats.mean.data() + ds.stats.mean.size());
  stats["std"] = std::vector<double>(ds.stats.std.data(), ds.stats.std.data() + ds.stats.std.size());
  j["normalization"] = stats;
  return j.dump(2) + "\n";
}

}  // namespace trendvol
