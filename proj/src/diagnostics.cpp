#include "trendvol/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace trendvol {

Metrics compute_metrics(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("compute_metrics: length mismatch");
  if (target.empty()) throw std::invalid_argument("compute_metrics: empty input");
  const auto n = target.size();
  const double dn = static_cast<double>(n);
  Metrics m;
  m.n = n;
  double ape = 0.0, sq = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(target[i] > 0.0)) throw std::domain_error("compute_metrics: nonpositive target");
    const double e = pred[i] - target[i];
    ape += std::abs(e) / target[i];
    sq += e * e;
    sum += e;
  }
  m.mape = 100.0 * ape / dn;
  m.rmse = std::sqrt(sq / dn);
  m.residual_mean = sum / dn;
  if (n > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = pred[i] - target[i] - m.residual_mean;
      ss += d * d;
    }
    m.residual_std = std::sqrt(ss / (dn - 1.0));
  }
  return m;
}

AcfResult acf_pacf(std::span<const double> x, int max_lag) {
  if (max_lag < 1) throw std::invalid_argument("acf_pacf: max_lag must be >= 1");
  const auto n = x.size();
  if (n <= static_cast<std::size_t>(max_lag) + 5) throw std::invalid_argument("acf_pacf: series too short");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw std::domain_error("acf_pacf: zero variance");

  AcfResult res;
  res.band = 2.0 / std::sqrt(static_cast<double>(n));
  for (int k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) ck += (x[t] - mean) * (x[t - static_cast<std::size_t>(k)] - mean);
    res.lags.push_back(k);
    res.acf.push_back(ck / c0);
  }

  // Durbin-Levinson: phi[j] holds phi_{k,j+1}.
  std::vector<double> phi, prev;
  for (int k = 1; k <= max_lag; ++k) {
    const double rk = res.acf[static_cast<std::size_t>(k - 1)];
    double phikk = rk;
    if (k > 1) {
      double num = rk, den = 1.0;
      for (int j = 1; j < k; ++j) {
        num -= prev[static_cast<std::size_t>(j - 1)] * res.acf[static_cast<std::size_t>(k - j - 1)];
        den -= prev[static_cast<std::size_t>(j - 1)] * res.acf[static_cast<std::size_t>(j - 1)];
      }
      phikk = num / den;
    }
    phi.assign(static_cast<std::size_t>(k), 0.0);
    for (int j = 1; j < k; ++j)
      phi[static_cast<std::size_t>(j - 1)] =
          prev[static_cast<std::size_t>(j - 1)] - phikk * prev[static_cast<std::size_t>(k - j - 1)];
    phi[static_cast<std::size_t>(k - 1)] = phikk;
    res.pacf.push_back(phikk);
    prev = phi;
  }
  for (std::size_t i = 0; i < res.acf.size(); ++i)
    if (std::abs(res.acf[i]) > res.band) res.significant_lags.push_back(res.lags[i]);
  return res;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Sorts `buf` in place.
double ks_normal_fitted(std::vector<double>& buf) {
  const auto n = buf.size();
  const double dn = static_cast<double>(n);
  double mean = 0.0;
  for (double v : buf) mean += v;
  mean /= dn;
  double ss = 0.0;
  for (double v : buf) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (dn - 1.0));
  if (!(sd > 0.0)) throw std::domain_error("lilliefors: zero variance");
  std::sort(buf.begin(), buf.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = normal_cdf((buf[i] - mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / dn - F, F - static_cast<double>(i) / dn});
  }
  return d;
}

}  // namespace

double lilliefors_statistic(std::span<const double> x) {
  if (x.size() < 20) throw std::invalid_argument("lilliefors: need at least 20 points");
  std::vector<double> buf(x.begin(), x.end());
  return ks_normal_fitted(buf);
}

KsResult lilliefors_test(std::span<const double> x, int mc_reps, std::uint64_t seed) {
  if (mc_reps < 1) throw std::invalid_argument("lilliefors: mc_reps must be >= 1");
  KsResult res;
  res.statistic = lilliefors_statistic(x);
  res.mc_reps = mc_reps;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> buf(x.size());
  int exceed = 0;
  for (int rep = 0; rep < mc_reps; ++rep) {
    for (auto& v : buf) v = normal(rng);
    if (ks_normal_fitted(buf) >= res.statistic) ++exceed;
  }
  res.p_value = (static_cast<double>(exceed) + 1.0) / (static_cast<double>(mc_reps) + 1.0);
  res.reject_at_1pct = res.p_value < 0.01;
  return res;
}

double relative_reduction(double candidate, double baseline) { return (baseline - candidate) / baseline; }

ModelReport build_report(const std::vector<ModelPredictions>& models, std::span<const double> targets, int max_lag,
                         int mc_reps, std::uint64_t seed) {
  if (models.empty()) throw std::invalid_argument("build_report: no models");
  ModelReport report;
  report.targets.assign(targets.begin(), targets.end());
  report.predictions = models;
  std::size_t best = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].predictions.size() != targets.size())
      throw std::invalid_argument("build_report: predictions of '" + models[i].name + "' are misaligned");
    report.models.push_back({models[i].name, compute_metrics(models[i].predictions, targets)});
    if (report.models[i].metrics.mape < report.models[best].metrics.mape) best = i;
  }
  report.best_model = models[best].name;
  for (std::size_t i = 0; i < models.size(); ++i)
    if (i != best)
      report.relative_mape_reduction.emplace_back(
          models[i].name, relative_reduction(report.models[best].metrics.mape, report.models[i].metrics.mape));

  std::vector<double> resid(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) resid[i] = models[best].predictions[i] - targets[i];
  const int lag = std::min<int>(max_lag, static_cast<int>(resid.size()) - 6);
  if (lag >= 1) {
    try {
      report.best_acf = acf_pacf(resid, lag);
    } catch (const std::domain_error&) {
    }
  }
  if (resid.size() >= 20) {
    try {
      report.best_normality = lilliefors_test(resid, mc_reps, seed);
    } catch (const std::domain_error&) {
    }
  }
  return report;
}

nlohmann::json report_json(const ModelReport& r) {
  nlohmann::json j;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : r.models)
    models.push_back({{"model", m.name},
                      {"mape", m.metrics.mape},
                      {"rmse", m.metrics.rmse},
                      {"n", m.metrics.n},
                      {"residual_mean", m.metrics.residual_mean},
                      {"residual_std", m.metrics.residual_std}});
  j["models"] = models;
  j["best_model"] = r.best_model;
  nlohmann::json rel = nlohmann::json::object();
  for (const auto& [name, v] : r.relative_mape_reduction) rel[name] = v;
  j["relative_mape_reduction_vs"] = rel;
  j["best_model_residuals"] = {
      {"acf", r.best_acf.acf},
      {"pacf", r.best_acf.pacf},
      {"band", r.best_acf.band},
      {"significant_lags", r.best_acf.significant_lags},
      {"normality",
       {{"test", "lilliefors"},
        {"statistic", r.best_normality.statistic},
        {"p_value", r.best_normality.p_value},
        {"reject_at_1pct", r.best_normality.reject_at_1pct},
        {"mc_reps", r.best_normality.mc_reps}}}};
  // Published full-scale figures, for context only; not comparable to synthetic runs.
  j["reference_values"] = {{"LSTM_0", {{"rmse", 2.89e-3}, {"mape", 24.2}}},
                           {"LSTM_r", {{"rmse", 2.88e-3}, {"mape", 27.2}}},
                           {"GARCH", {{"rmse", 3.13e-3}, {"mape", 34.9}}}};
  return j;
}

std::string report_table(const ModelReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %14s %10s %14s %14s %6s\n", "model", "rmse", "mape%", "resid_mean",
                "resid_std", "n");
  out << line;
  for (const auto& m : r.models) {
    std::snprintf(line, sizeof line, "%-10s %14.6e %10.3f %14.6e %14.6e %6zu\n", m.name.c_str(), m.metrics.rmse,
                  m.metrics.mape, m.metrics.residual_mean, m.metrics.residual_std, m.metrics.n);
    out << line;
  }
  out << "\nbest model: " << r.best_model << "\n";
  for (const auto& [name, v] : r.relative_mape_reduction) {
    std::snprintf(line, sizeof line, "  MAPE reduction vs %-10s %7.2f%%\n", name.c_str(), 100.0 * v);
    out << line;
  }
  std::snprintf(line, sizeof line, "residual ACF band +/-%.4f, significant lags: %zu of %zu\n", r.best_acf.band,
                r.best_acf.significant_lags.size(), r.best_acf.acf.size());
  out << line;
  std::snprintf(line, sizeof line, "Lilliefors D = %.4f, p = %.4g (%d reps)%s\n", r.best_normality.statistic,
                r.best_normality.p_value, r.best_normality.mc_reps,
                r.best_normality.reject_at_1pct ? ", normality rejected at 1%" : "");
  out << line;
  return out.str();
}

}  // namespace trendvol
