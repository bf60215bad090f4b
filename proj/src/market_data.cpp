#include "trendvol/market_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "trendvol/error.hpp"
#include "trendvol/text.hpp"

namespace trendvol {

namespace {

std::string row_context(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

// ---------------------------------------------------------------------------
// bars and series

void validate_bar(const OhlcBar& bar) {
  for (double p : {bar.open, bar.high, bar.low, bar.close, bar.adj_close})
    if (!(p > 0.0) || !std::isfinite(p)) throw DataError("nonpositive or non-finite price");
  if (bar.low > bar.high) throw DataError("low > high");
  if (bar.low > std::min(bar.open, bar.close)) throw DataError("low above open/close");
  if (bar.high < std::max(bar.open, bar.close)) throw DataError("high below open/close");
}

OhlcSeries::OhlcSeries(std::vector<OhlcBar> bars) : bars_(std::move(bars)) {
  std::stable_sort(bars_.begin(), bars_.end(),
                   [](const OhlcBar& a, const OhlcBar& b) { return a.date < b.date; });
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    try {
      validate_bar(bars_[i]);
    } catch (const DataError& e) {
      throw DataError(format_date(bars_[i].date) + ": " + e.what());
    }
    if (i > 0 && bars_[i].date == bars_[i - 1].date)
      throw DataError("duplicate date " + format_date(bars_[i].date));
  }
}

OhlcSeries parse_ohlc(std::string_view csv_text) {
  const auto rows = text::lines(csv_text);
  if (rows.empty()) throw DataError("empty OHLC file");
  if (text::trim(rows[0]) != "date,open,high,low,close,adj_close")
    throw DataError(row_context(1) + "expected header date,open,high,low,close,adj_close");

  std::vector<OhlcBar> bars;
  std::set<Date> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    const auto fields = text::split(rows[i], ',');
    if (fields.size() != 6) throw DataError(row_context(i + 1) + "expected 6 fields");
    OhlcBar bar;
    const auto date = parse_date(text::trim(fields[0]));
    if (!date) throw DataError(row_context(i + 1) + "bad date '" + std::string(fields[0]) + "'");
    bar.date = *date;
    double* slots[] = {&bar.open, &bar.high, &bar.low, &bar.close, &bar.adj_close};
    for (std::size_t f = 0; f < 5; ++f)
      if (!text::parse_double(fields[f + 1], *slots[f]))
        throw DataError(row_context(i + 1) + "non-numeric field '" + std::string(fields[f + 1]) + "'");
    try {
      validate_bar(bar);
    } catch (const DataError& e) {
      throw DataError(row_context(i + 1) + e.what());
    }
    if (!seen.insert(bar.date).second)
      throw DataError(row_context(i + 1) + "duplicate date " + format_date(bar.date));
    bars.push_back(bar);
  }
  return OhlcSeries(std::move(bars));
}

std::vector<TrendSeries> parse_trends(std::string_view csv_text) {
  const auto rows = text::lines(csv_text);
  if (rows.empty() || text::trim(rows[0]).empty()) throw DataError("empty trends file");
  const auto header = text::split(rows[0], ',');
  if (header.size() < 2 || text::trim(header[0]) != "date")
    throw DataError(row_context(1) + "expected header date,<trend>...");

  std::vector<TrendSeries> out;
  std::set<std::string> names;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string name(text::trim(header[c]));
    if (name.empty()) throw DataError(row_context(1) + "empty column name");
    if (!names.insert(name).second) throw DataError(row_context(1) + "duplicate column " + name);
    out.push_back(TrendSeries{std::move(name), {}, {}});
  }

  std::vector<std::pair<Date, std::vector<double>>> records;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    const auto fields = text::split(rows[i], ',');
    if (fields.size() != header.size())
      throw DataError(row_context(i + 1) + "expected " + std::to_string(header.size()) + " fields");
    const auto date = parse_date(text::trim(fields[0]));
    if (!date) throw DataError(row_context(i + 1) + "bad date '" + std::string(fields[0]) + "'");
    std::vector<double> vals(out.size());
    for (std::size_t c = 0; c < out.size(); ++c) {
      if (!text::parse_double(fields[c + 1], vals[c]) || !std::isfinite(vals[c]))
        throw DataError(row_context(i + 1) + "non-numeric cell in column " + out[c].name);
      if (vals[c] < 0.0) throw DataError(row_context(i + 1) + "negative value in column " + out[c].name);
    }
    records.emplace_back(*date, std::move(vals));
  }
  if (records.empty()) throw DataError("trends file has no data rows");
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].first == records[i - 1].first)
      throw DataError("duplicate date " + format_date(records[i].first) + " in trends");

  for (auto& series : out) {
    series.dates.reserve(records.size());
    series.values.reserve(records.size());
  }
  for (const auto& [date, vals] : records)
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c].dates.push_back(date);
      out[c].values.push_back(vals[c]);
    }
  return out;
}

std::string write_ohlc_csv(const OhlcSeries& series) {
  std::string out = "date,open,high,low,close,adj_close\n";
  for (const auto& b : series.bars()) {
    out += format_date(b.date);
    for (double v : {b.open, b.high, b.low, b.close, b.adj_close}) {
      out += ',';
      out += text::format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string write_trends_csv(const std::vector<TrendSeries>& trends) {
  if (trends.empty()) throw std::invalid_argument("write_trends_csv: no series");
  std::string out = "date";
  for (const auto& t : trends) out += "," + t.name;
  out += '\n';
  const auto n = trends.front().dates.size();
  for (const auto& t : trends)
    if (t.dates != trends.front().dates || t.values.size() != n)
      throw std::invalid_argument("write_trends_csv: series must share one date index");
  for (std::size_t i = 0; i < n; ++i) {
    out += format_date(trends.front().dates[i]);
    for (const auto& t : trends) {
      out += ',';
      out += text::format_double(t.values[i]);
    }
    out += '\n';
  }
  return out;
}

SynthConfig parse_synth_config(std::string_view text_in) {
  SynthConfig cfg;
  std::size_t line_no = 0;
  for (auto line : text::lines(text_in)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError(row_context(line_no) + "expected key = value");
    const auto key = text::trim(line.substr(0, eq));
    const auto raw = text::trim(line.substr(eq + 1));
    double v = 0.0;
    if (!text::parse_double(raw, v)) throw DataError(row_context(line_no) + "non-numeric value");
    auto as_int = [&](auto& slot) {
      if (v != std::floor(v)) throw DataError(row_context(line_no) + std::string(key) + " must be an integer");
      slot = static_cast<std::remove_reference_t<decltype(slot)>>(v);
    };
    if (key == "n_days") as_int(cfg.n_days);
    else if (key == "n_trends") as_int(cfg.n_trends);
    else if (key == "n_coupled") as_int(cfg.n_coupled);
    else if (key == "gamma") cfg.gamma = v;
    else if (key == "seed") as_int(cfg.seed);
    else if (key == "garch_omega") cfg.garch_omega = v;
    else if (key == "garch_alpha") cfg.garch_alpha = v;
    else if (key == "garch_beta") cfg.garch_beta = v;
    else throw DataError(row_context(line_no) + "unknown key '" + std::string(key) + "'");
  }
  validate(cfg);
  return cfg;
}

void validate(const SynthConfig& c) {
  if (c.n_days < 100) throw std::invalid_argument("synth: n_days must be >= 100");
  if (c.n_trends < 0) throw std::invalid_argument("synth: n_trends must be >= 0");
  if (c.n_coupled < 0 || c.n_coupled > c.n_trends)
    throw std::invalid_argument("synth: n_coupled must lie in [0, n_trends]");
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) throw std::invalid_argument("synth: gamma must be >= 0");
  if (!(c.garch_omega > 0.0)) throw std::invalid_argument("synth: garch_omega must be > 0");
  if (c.garch_alpha < 0.0 || c.garch_beta < 0.0 || c.garch_alpha + c.garch_beta >= 1.0)
    throw std::invalid_argument("synth: need garch_alpha, garch_beta >= 0 and alpha + beta < 1");
}

// ---------------------------------------------------------------------------
// estimators

std::vector<DatedValue> daily_returns(const OhlcSeries& series) {
  if (series.size() < 2) throw std::invalid_argument("daily_returns: need at least 2 bars");
  std::vector<DatedValue> out;
  out.reserve(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double prev = series[i - 1].adj_close;
    const double cur = series[i].adj_close;
    if (!(prev > 0.0) || !(cur > 0.0)) throw DataError("daily_returns: nonpositive adj_close");
    out.push_back({series[i].date, std::log(cur / prev)});
  }
  return out;
}

VolEstimate garman_klass(const OhlcBar& bar) {
  for (double p : {bar.open, bar.high, bar.low, bar.close})
    if (!(p > 0.0)) throw DataError("garman_klass: nonpositive price");
  VolEstimate e;
  e.u = std::log(bar.high / bar.open);
  e.d = std::log(bar.low / bar.open);
  e.c = std::log(bar.close / bar.open);
  const double var = garman_klass_variance(e.u, e.d, e.c);
  e.clamped = var < 0.0;
  e.sigma = e.clamped ? 0.0 : std::sqrt(var);
  return e;
}

// ---------------------------------------------------------------------------
// panel

Eigen::Index FeaturePanel::column_index(std::string_view name) const {
  if (name == "return") name = kReturnColumn;
  if (name == "volatility") name = kSigmaColumn;
  for (std::size_t i = 0; i < feature_order.size(); ++i)
    if (feature_order[i] == name) return static_cast<Eigen::Index>(i);
  throw std::invalid_argument("unknown feature '" + std::string(name) + "'");
}

FeaturePanel FeaturePanel::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > rows() || begin > end) throw std::out_of_range("FeaturePanel::slice");
  FeaturePanel out;
  out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.values = values.middleRows(begin, end - begin);
  out.feature_order = feature_order;
  out.clamped_days = clamped_days;
  return out;
}

FeaturePanel FeaturePanel::select(std::span<const std::string> names) const {
  FeaturePanel out;
  out.dates = dates;
  out.clamped_days = clamped_days;
  out.values.resize(rows(), static_cast<Eigen::Index>(names.size()));
  std::set<Eigen::Index> used;
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto col = column_index(names[j]);
    if (!used.insert(col).second) throw std::invalid_argument("duplicate feature '" + names[j] + "'");
    out.values.col(static_cast<Eigen::Index>(j)) = values.col(col);
    out.feature_order.push_back(feature_order[static_cast<std::size_t>(col)]);
  }
  return out;
}

FeaturePanel assemble_panel(const OhlcSeries& ohlc, const std::vector<TrendSeries>& trends) {
  if (ohlc.size() < 2) throw std::invalid_argument("assemble_panel: need at least 2 OHLC bars");

  Date lo = ohlc[0].date;
  Date hi = ohlc[ohlc.size() - 1].date;
  std::vector<std::map<Date, double>> lookup;
  std::set<std::string> names;
  for (const auto& t : trends) {
    if (t.dates.size() != t.values.size() || t.dates.empty())
      throw DataError("trend '" + t.name + "' is empty or ragged");
    if (!names.insert(t.name).second) throw DataError("duplicate trend name '" + t.name + "'");
    if (t.name == kReturnColumn || t.name == kSigmaColumn)
      throw DataError("trend name '" + t.name + "' collides with a market column");
    lo = std::max(lo, t.dates.front());
    hi = std::min(hi, t.dates.back());
    auto& m = lookup.emplace_back();
    for (std::size_t i = 0; i < t.dates.size(); ++i) m.emplace(t.dates[i], t.values[i]);
  }
  if (hi < lo) throw DataError("assemble_panel: empty intersection of dates");

  std::vector<std::size_t> bar_idx;
  for (std::size_t i = 0; i < ohlc.size(); ++i)
    if (ohlc[i].date >= lo && ohlc[i].date <= hi) bar_idx.push_back(i);
  if (bar_idx.size() < 2) throw DataError("assemble_panel: fewer than 2 common dates");

  for (std::size_t j = 0; j < trends.size(); ++j)
    for (auto i : bar_idx)
      if (!lookup[j].contains(ohlc[i].date))
        throw DataError("trend '" + trends[j].name + "' has no value on trading day " +
                        format_date(ohlc[i].date));

  const auto n = static_cast<Eigen::Index>(bar_idx.size() - 1);
  FeaturePanel panel;
  panel.feature_order = {std::string(kReturnColumn), std::string(kSigmaColumn)};
  for (const auto& t : trends) panel.feature_order.push_back(t.name);
  panel.values.resize(n, static_cast<Eigen::Index>(panel.feature_order.size()));
  panel.dates.reserve(static_cast<std::size_t>(n));

  for (Eigen::Index row = 0; row < n; ++row) {
    const auto& prev = ohlc[bar_idx[static_cast<std::size_t>(row)]];
    const auto& bar = ohlc[bar_idx[static_cast<std::size_t>(row) + 1]];
    panel.dates.push_back(bar.date);
    panel.values(row, 0) = std::log(bar.adj_close / prev.adj_close);
    const auto gk = garman_klass(bar);
    panel.clamped_days += gk.clamped ? 1 : 0;
    panel.values(row, 1) = gk.sigma;
    for (std::size_t j = 0; j < trends.size(); ++j)
      panel.values(row, static_cast<Eigen::Index>(j) + 2) = lookup[j].at(bar.date);
  }
  return panel;
}

std::pair<FeaturePanel, FeaturePanel> split_train_test(const FeaturePanel& panel, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split_train_test: fraction must lie in (0, 1)");
  if (panel.rows() < 2) throw std::invalid_argument("split_train_test: panel needs at least 2 rows");
  const auto n_train = static_cast<Eigen::Index>(std::floor(static_cast<double>(panel.rows()) * train_fraction));
  if (n_train < 1 || n_train >= panel.rows())
    throw std::invalid_argument("split_train_test: fraction leaves an empty side");
  return {panel.slice(0, n_train), panel.slice(n_train, panel.rows())};
}

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller

int schwert_max_lag(std::size_t n) {
  return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double mackinnon_pvalue(double tau) {
  // Constant-only response surface, N = 1 (MacKinnon 1994, as tabulated in
  // common econometrics packages).
  constexpr double kTauMax = 2.74;
  constexpr double kTauMin = -18.83;
  constexpr double kTauStar = -1.61;
  constexpr std::array<double, 3> kSmall{2.1659, 1.4412, 0.038269};
  constexpr std::array<double, 4> kLarge{1.7339, 0.93202e-1, -0.12745e-1, -0.10368e-2};
  if (tau > kTauMax) return 1.0;
  if (tau < kTauMin) return 0.0;
  double z = 0.0;
  if (tau <= kTauStar) {
    for (std::size_t i = kSmall.size(); i-- > 0;) z = z * tau + kSmall[i];
  } else {
    for (std::size_t i = kLarge.size(); i-- > 0;) z = z * tau + kLarge[i];
  }
  return normal_cdf(z);
}

namespace {

struct AdfFit {
  double ssr = 0.0;
  double tstat = 0.0;
  Eigen::Index nobs = 0;
  Eigen::Index nparams = 0;
};

// Regresses dy_t on [1, y_{t-1}, dy_{t-1..t-lag}] for t in [first, n).
AdfFit adf_regression(std::span<const double> y, int lag, Eigen::Index first) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const Eigen::Index nobs = n - first;
  const Eigen::Index k = 2 + lag;
  Eigen::MatrixXd X(nobs, k);
  Eigen::VectorXd dy(nobs);
  for (Eigen::Index r = 0; r < nobs; ++r) {
    const Eigen::Index t = first + r;
    dy(r) = y[t] - y[t - 1];
    X(r, 0) = 1.0;
    X(r, 1) = y[t - 1];
    for (int j = 1; j <= lag; ++j) X(r, 1 + j) = y[t - j] - y[t - j - 1];
  }
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  const Eigen::VectorXd beta = ldlt.solve(X.transpose() * dy);
  const Eigen::VectorXd resid = dy - X * beta;
  AdfFit fit;
  fit.ssr = resid.squaredNorm();
  fit.nobs = nobs;
  fit.nparams = k;
  const double s2 = fit.ssr / static_cast<double>(nobs - k);
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  const double se = std::sqrt(s2 * inv(1, 1));
  fit.tstat = se > 0.0 ? beta(1) / se : (beta(1) < 0.0 ? -std::numeric_limits<double>::infinity()
                                                        : std::numeric_limits<double>::infinity());
  return fit;
}

}  // namespace

AdfResult adf_test(std::span<const double> x, int max_lag) {
  if (max_lag < 0) throw std::invalid_argument("adf_test: max_lag must be >= 0");
  if (x.size() < static_cast<std::size_t>(max_lag) + 10)
    throw std::invalid_argument("adf_test: series too short for max_lag");
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (*mn == *mx) throw std::invalid_argument("adf_test: zero-variance series");

  // Lag search on the common sample, then refit the winner on all usable rows.
  int best_lag = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int lag = 0; lag <= max_lag; ++lag) {
    const auto fit = adf_regression(x, lag, max_lag + 1);
    const auto nobs = static_cast<double>(fit.nobs);
    const double aic = nobs * std::log(fit.ssr / nobs) + 2.0 * static_cast<double>(fit.nparams);
    if (aic < best_aic) {
      best_aic = aic;
      best_lag = lag;
    }
  }
  const auto fit = adf_regression(x, best_lag, best_lag + 1);
  AdfResult res;
  res.test_statistic = fit.tstat;
  res.p_value = mackinnon_pvalue(fit.tstat);
  res.lag_order = best_lag;
  res.stationary_at_5pct = res.p_value < 0.05;
  return res;
}

// ---------------------------------------------------------------------------
// synthetic data

std::span<const std::string_view> trend_abbreviations() {
  static constexpr std::array<std::string_view, 23> kNames{
      "advert", "airtvl", "autoby", "autofi", "bizind", "bnkrpt", "comput", "crcard",
      "durble", "educat", "invest", "finpln", "furntr", "insur",  "jobs",   "luxury",
      "mobile", "mrtge",  "rlest",  "rental", "shop",   "smallbiz", "travel"};
  return kNames;
}

SynthData synth_generate(const SynthConfig& cfg) {
  validate(cfg);
  constexpr int kLead = 3;
  constexpr int kSubsteps = 32;
  constexpr double kLatentPhi = 0.7;
  constexpr double kTrendPhi = 0.5;
  constexpr double kTrendScale = 0.25;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto open_uniform = [&] {
    double u = 0.0;
    while (u <= 0.0) u = unif(rng);
    return u;
  };

  const int n = cfg.n_days;
  // Latent volatility driver, observed early by the coupled trends.
  std::vector<double> latent(static_cast<std::size_t>(n + kLead));
  latent[0] = normal(rng);
  const double innov = std::sqrt(1.0 - kLatentPhi * kLatentPhi);
  for (std::size_t t = 1; t < latent.size(); ++t) latent[t] = kLatentPhi * latent[t - 1] + innov * normal(rng);

  std::vector<OhlcBar> bars;
  bars.reserve(static_cast<std::size_t>(n));
  Date date{std::chrono::year{2004}, std::chrono::October, std::chrono::day{19}};
  double h = cfg.garch_omega / (1.0 - cfg.garch_alpha - cfg.garch_beta);
  double prev_close = 100.0;
  std::vector<double> path(kSubsteps + 1);
  for (int t = 0; t < n; ++t) {
    const double var = h * std::exp(cfg.gamma * latent[static_cast<std::size_t>(t)] - 0.5 * cfg.gamma * cfg.gamma);
    const double r = std::sqrt(var) * normal(rng);
    h = cfg.garch_omega + cfg.garch_alpha * h + cfg.garch_beta * r * r;

    // Brownian bridge from 0 to r on a coarse grid; each sub-interval's extremes
    // are drawn exactly from the bridge max/min laws.
    const double step_var = var / kSubsteps;
    path[0] = 0.0;
    for (int k = 1; k <= kSubsteps; ++k) path[k] = path[k - 1] + std::sqrt(step_var) * normal(rng);
    const double end = path[kSubsteps];
    for (int k = 1; k <= kSubsteps; ++k) path[k] -= (static_cast<double>(k) / kSubsteps) * (end - r);
    path[kSubsteps] = r;
    double hi = 0.0, lo = 0.0;
    for (int k = 0; k < kSubsteps; ++k) {
      const double a = path[k], b = path[k + 1], gap = (b - a) * (b - a);
      hi = std::max(hi, 0.5 * (a + b + std::sqrt(gap - 2.0 * step_var * std::log(open_uniform()))));
      lo = std::min(lo, 0.5 * (a + b - std::sqrt(gap - 2.0 * step_var * std::log(open_uniform()))));
    }

    OhlcBar bar;
    bar.date = date;
    bar.open = prev_close;
    bar.close = prev_close * std::exp(r);
    bar.adj_close = bar.close;
    bar.high = std::max({prev_close * std::exp(hi), bar.open, bar.close});
    bar.low = std::min({prev_close * std::exp(lo), bar.open, bar.close});
    bars.push_back(bar);
    prev_close = bar.close;
    date = next_weekday(date);
  }

  SynthData out;
  out.ohlc = OhlcSeries(std::move(bars));
  const auto names = trend_abbreviations();
  const double noise_w = std::sqrt(std::max(0.0, 1.0 - cfg.gamma * cfg.gamma));
  const double own_innov = std::sqrt(1.0 - kTrendPhi * kTrendPhi);
  for (int j = 0; j < cfg.n_trends; ++j) {
    TrendSeries ts;
    const auto base = names[static_cast<std::size_t>(j) % names.size()];
    ts.name = std::string(base);
    if (j >= static_cast<int>(names.size())) ts.name += std::to_string(j / static_cast<int>(names.size()));
    const bool coupled = j < cfg.n_coupled;
    const int lead = 1 + j % kLead;
    double own = normal(rng);
    double first = 0.0;
    ts.dates.reserve(static_cast<std::size_t>(n));
    ts.values.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
      if (t > 0) own = kTrendPhi * own + own_innov * normal(rng);
      const double signal =
          coupled ? cfg.gamma * latent[static_cast<std::size_t>(t + lead)] + noise_w * own : own;
      if (t == 0) first = signal;
      ts.dates.push_back(out.ohlc[static_cast<std::size_t>(t)].date);
      ts.values.push_back(std::exp(kTrendScale * (signal - first)));
    }
    if (coupled) out.coupled.push_back(ts.name);
    out.trends.push_back(std::move(ts));
  }
  return out;
}

}  // namespace trendvol
