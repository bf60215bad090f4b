#include "trendvol/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trendvol/benchmarks.hpp"
#include "trendvol/diagnostics.hpp"
#include "trendvol/error.hpp"
#include "trendvol/infometrics.hpp"
#include "trendvol/lstm.hpp"
#include "trendvol/market_data.hpp"
#include "trendvol/scheme.hpp"
#include "trendvol/text.hpp"

namespace trendvol::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvaluationMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string ohlc;
  std::string trends;
  std::string out = "out";
  std::string config;
  double train_frac = 0.7;

  std::string dt = "auto";
  std::string k = "auto";
  std::string dt_grid = "1,2,3,4,5,6,7,8,9,10";
  std::string k_grid = "5,10,20,30,60,120,inf";
  std::string target = "volatility";
  int bins = 10;
  std::size_t min_samples = 1000;

  int lag = 10;
  int batch = 32;
  int epochs = 600;
  double val_frac = 0.2;
  double lr = 1e-3;
  int cell_dim = 1;
  double init_constant = 0.05;
  bool teacher_forcing = false;
  bool normalize_target = false;
  std::string validation = "chronological";
  std::uint64_t seed = 0;
  std::string models = "lstm,lstm_r,garch,ridge,lasso";
  std::string features = "volatility,return,comput,crcard,invest,bnkrpt";

  int mc_reps = 10000;
  int acf_lags = 20;
};

struct SynthOptions {
  std::string out = "data";
  std::string config;
  SynthConfig synth;
};

// Model keys on the command line and their report names.
const std::vector<std::pair<std::string, std::string>>& model_names() {
  static const std::vector<std::pair<std::string, std::string>> names{
      {"lstm", "LSTM_0"}, {"lstm_r", "LSTM_r"}, {"garch", "GARCH"}, {"ridge", "Ridge"}, {"lasso", "Lasso"}};
  return names;
}

std::string display_name(const std::string& key) {
  for (const auto& [k, v] : model_names())
    if (k == key) return v;
  throw UsageError("unknown model '" + key + "' (expected lstm, lstm_r, garch, ridge or lasso)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : text::split(s, ',')) {
    const auto t = text::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<std::string> parse_models(const std::string& s) {
  auto list = split_list(s);
  if (list.empty()) throw UsageError("--models is empty");
  std::set<std::string> seen;
  for (const auto& m : list) {
    display_name(m);
    if (!seen.insert(m).second) throw UsageError("model '" + m + "' listed twice");
  }
  return list;
}

std::string read_input(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("file not found: " + path.string());
  try {
    return text::read_file(path);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
}

json read_json(const fs::path& path) {
  const auto content = read_input(path);
  try {
    return json::parse(content);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

template <typename Parser>
auto parse_file(const std::string& path, Parser parser) {
  const std::string content = read_input(path);
  try {
    return parser(content);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_output(const fs::path& path, std::string_view content) { text::write_file(path, content); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// -- panel cache --------------------------------------------------------------

struct PanelCache {
  FeaturePanel panel;
  Eigen::Index train_rows = 0;

  FeaturePanel train() const { return panel.slice(0, train_rows); }
  FeaturePanel test() const { return panel.slice(train_rows, panel.rows()); }
};

void write_panel_cache(const fs::path& dir, const FeaturePanel& panel, Eigen::Index train_rows, const Options& o) {
  std::string csv = "date";
  for (const auto& f : panel.feature_order) csv += "," + f;
  csv += '\n';
  for (Eigen::Index i = 0; i < panel.rows(); ++i) {
    csv += format_date(panel.dates[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < panel.cols(); ++c) csv += "," + text::format_double(panel.values(i, c));
    csv += '\n';
  }
  write_output(dir / "panel.csv", csv);

  json meta;
  meta["feature_order"] = panel.feature_order;
  meta["n_rows"] = panel.rows();
  meta["train_rows"] = train_rows;
  meta["train_fraction"] = o.train_frac;
  meta["train_start"] = format_date(panel.dates.front());
  meta["train_end"] = format_date(panel.dates[static_cast<std::size_t>(train_rows - 1)]);
  meta["test_start"] = format_date(panel.dates[static_cast<std::size_t>(train_rows)]);
  meta["test_end"] = format_date(panel.dates.back());
  meta["clamped_days"] = panel.clamped_days;
  meta["sources"] = {{"ohlc", o.ohlc}, {"trends", o.trends}};
  write_output(dir / "panel.json", dump(meta));
}

PanelCache load_panel_cache(const fs::path& dir) {
  const json meta = read_json(dir / "panel.json");
  const auto csv_path = dir / "panel.csv";
  const std::string csv = read_input(csv_path);
  PanelCache cache;
  auto& p = cache.panel;
  try {
    p.feature_order = meta.at("feature_order").get<std::vector<std::string>>();
    cache.train_rows = meta.at("train_rows").get<Eigen::Index>();
    p.clamped_days = meta.at("clamped_days").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw DataError((dir / "panel.json").string() + ": " + e.what());
  }
  const auto rows = text::lines(csv);
  if (rows.empty()) throw DataError(csv_path.string() + ": empty file");
  std::string header = "date";
  for (const auto& f : p.feature_order) header += "," + f;
  if (rows[0] != header) throw DataError(csv_path.string() + ": header does not match panel.json");
  const auto F = static_cast<Eigen::Index>(p.feature_order.size());
  std::vector<std::string_view> body;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!text::trim(rows[i]).empty()) body.push_back(rows[i]);
  p.values.resize(static_cast<Eigen::Index>(body.size()), F);
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto fields = text::split(body[i], ',');
    const std::string where = csv_path.string() + ":" + std::to_string(i + 2);
    if (static_cast<Eigen::Index>(fields.size()) != F + 1) throw DataError(where + ": wrong field count");
    const auto date = parse_date(fields[0]);
    if (!date) throw DataError(where + ": bad date");
    p.dates.push_back(*date);
    for (Eigen::Index c = 0; c < F; ++c) {
      double v = 0.0;
      if (!text::parse_double(fields[static_cast<std::size_t>(c + 1)], v)) throw DataError(where + ": bad number");
      p.values(static_cast<Eigen::Index>(i), c) = v;
    }
  }
  if (cache.train_rows < 1 || cache.train_rows >= p.rows())
    throw DataError((dir / "panel.json").string() + ": train_rows outside the panel");
  return cache;
}

// -- scheme file --------------------------------------------------------------

Scheme load_scheme(const fs::path& dir) {
  const json j = read_json(dir / "scheme.json");
  try {
    Scheme s{j.at("dt").get<int>(), parse_k(j.at("k").get<std::string>())};
    validate(s);
    return s;
  } catch (const std::exception& e) {
    throw DataError((dir / "scheme.json").string() + ": " + e.what());
  }
}

std::optional<int> parse_k_option(const std::string& s) {
  try {
    return parse_k(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int parse_dt_option(const std::string& s) {
  double v = 0.0;
  if (!text::parse_double(s, v) || v != std::floor(v) || v < 1 || v > 1e6)
    throw UsageError("dt must be an integer >= 1 or 'auto', got '" + s + "'");
  return static_cast<int>(v);
}

json scheme_json(const Scheme& s) { return {{"dt", s.dt}, {"k", format_k(s.k)}}; }

// -- dataset construction -------------------------------------------------------

template <typename F>
auto build_checked(F&& f) {
  try {
    return f();
  } catch (const DataError&) {
    throw;
  } catch (const std::domain_error& e) {
    throw DataError(e.what());
  } catch (const std::invalid_argument& e) {
    throw InfeasibleScheme(e.what());
  }
}

SchemeOptions scheme_options(const Options& o, std::vector<std::string> features) {
  SchemeOptions so;
  so.lag_len = o.lag;
  so.features = std::move(features);
  so.normalize_target = o.normalize_target;
  return so;
}

std::vector<std::string> reduced_features(const Options& o, const FeaturePanel& panel) {
  const auto list = split_list(o.features);
  if (list.empty()) throw UsageError("--features is empty");
  for (const auto& f : list) {
    try {
      panel.column_index(f);
    } catch (const std::invalid_argument&) {
      throw DataError("feature '" + f + "' is not a panel column");
    }
  }
  return list;
}

Eigen::VectorXd aggregated_returns(const FeaturePanel& panel, int dt) {
  return aggregate(panel.values.col(panel.column_index(kReturnColumn)), dt, AggregationKind::ReturnSum);
}

json stats_json(const NormalizationStats& s) {
  return {{"k", format_k(s.k)},
          {"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"std", std::vector<double>(s.std.data(), s.std.data() + s.std.size())}};
}

bool same_stats(const NormalizationStats& a, const json& b) {
  return stats_json(a).dump() == b.dump();
}

TrainConfig train_config(const Options& o) {
  TrainConfig c;
  c.batch_size = o.batch;
  c.epochs = o.epochs;
  c.validation_fraction = o.val_frac;
  c.lr = o.lr;
  c.seed = o.seed;
  c.init_constant = o.init_constant;
  c.cell_dim = o.cell_dim;
  c.teacher_forcing = o.teacher_forcing;
  if (o.validation == "chronological") c.validation_mode = ValidationMode::Chronological;
  else if (o.validation == "random") c.validation_mode = ValidationMode::Random;
  else throw UsageError("--validation must be 'chronological' or 'random'");
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void check_common(const Options& o) {
  if (o.lag < 1) throw UsageError("--lag must be >= 1");
  if (o.bins < 2) throw UsageError("--bins must be >= 2");
  if (o.mc_reps < 1) throw UsageError("--mc-reps must be >= 1");
  if (o.acf_lags < 1) throw UsageError("--acf-lags must be >= 1");
  if (!(o.train_frac > 0.0 && o.train_frac < 1.0)) throw UsageError("--train-frac must lie in (0, 1)");
  try {
    parse_target_kind(o.target);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// -- commands -------------------------------------------------------------------

void cmd_ingest(const Options& o, std::ostream& out) {
  check_common(o);
  if (o.ohlc.empty()) throw UsageError("--ohlc is required");
  if (o.trends.empty()) throw UsageError("--trends is required");
  const auto ohlc = parse_file(o.ohlc, parse_ohlc);
  const auto trends = parse_file(o.trends, parse_trends);
  const auto panel = assemble_panel(ohlc, trends);
  const auto train_rows = static_cast<Eigen::Index>(std::floor(static_cast<double>(panel.rows()) * o.train_frac));
  if (train_rows < 1 || train_rows >= panel.rows()) throw DataError("panel too short to split");

  fs::create_directories(o.out);
  write_panel_cache(o.out, panel, train_rows, o);

  std::string report = "column,adf_stat,p_value,lag_order,stationary_5pct\n";
  int stationary = 0;
  for (Eigen::Index c = 0; c < panel.cols(); ++c) {
    const Eigen::VectorXd col = panel.values.col(c);
    const std::string& name = panel.feature_order[static_cast<std::size_t>(c)];
    try {
      const auto adf = adf_test(std::span(col.data(), static_cast<std::size_t>(col.size())));
      report += name + "," + text::format_double(adf.test_statistic) + "," + text::format_double(adf.p_value) + "," +
                std::to_string(adf.lag_order) + "," + (adf.stationary_at_5pct ? "1" : "0") + "\n";
      stationary += adf.stationary_at_5pct ? 1 : 0;
    } catch (const std::exception&) {
      report += name + ",nan,nan,0,0\n";
    }
  }
  write_output(fs::path(o.out) / "stationarity.csv", report);
  out << "panel: " << panel.rows() << " days x " << panel.cols() << " columns (" << format_date(panel.dates.front())
      << " .. " << format_date(panel.dates.back()) << ")\n"
      << "train rows: " << train_rows << ", test rows: " << panel.rows() - train_rows << "\n"
      << "stationary at 5%: " << stationary << " of " << panel.cols() << " columns\n";
  if (panel.clamped_days > 0) out << "Garman-Klass clamped to 0 on " << panel.clamped_days << " days\n";
}

std::vector<int> parse_dt_grid(const std::string& s) {
  std::vector<int> out;
  for (const auto& part : split_list(s)) out.push_back(parse_dt_option(part));
  if (out.empty()) throw UsageError("--dt-grid is empty");
  return out;
}

std::vector<std::optional<int>> parse_k_grid(const std::string& s) {
  std::vector<std::optional<int>> out;
  for (const auto& part : split_list(s)) out.push_back(parse_k_option(part));
  if (out.empty()) throw UsageError("--k-grid is empty");
  return out;
}

void cmd_select_scheme(const Options& o, std::ostream& out) {
  check_common(o);
  const bool auto_dt = o.dt == "auto", auto_k = o.k == "auto";
  std::vector<int> dts = auto_dt ? parse_dt_grid(o.dt_grid) : std::vector<int>{parse_dt_option(o.dt)};
  std::vector<std::optional<int>> ks =
      auto_k ? parse_k_grid(o.k_grid) : std::vector<std::optional<int>>{parse_k_option(o.k)};
  const TargetKind target = parse_target_kind(o.target);

  const auto cache = load_panel_cache(o.out);
  const auto train = cache.train();
  json record;
  Scheme chosen;
  if (!auto_dt && !auto_k) {
    chosen = Scheme{dts[0], ks[0]};
    record["source"] = "explicit";
  } else {
    const auto grid_vol = scan_grid(train, dts, ks, TargetKind::Volatility, o.bins);
    const auto grid_ret = scan_grid(train, dts, ks, TargetKind::Return, o.bins);
    write_output(fs::path(o.out) / "grid_volatility.csv", grid_csv(grid_vol));
    write_output(fs::path(o.out) / "grid_return.csv", grid_csv(grid_ret));
    const auto& grid = target == TargetKind::Volatility ? grid_vol : grid_ret;
    chosen = select_scheme(grid, o.min_samples);
    const auto i = std::find(dts.begin(), dts.end(), chosen.dt) - dts.begin();
    const auto j = std::find(ks.begin(), ks.end(), chosen.k) - ks.begin();
    record["source"] = "auto";
    record["mi_sum"] = grid.values(i, j);
    record["n_samples"] = grid.n_samples(i, j);
  }
  validate(chosen);
  const auto ranking = rank_features(train, chosen, target, o.bins, static_cast<std::size_t>(train.cols()));
  write_output(fs::path(o.out) / "ranking.csv", ranking_csv(ranking));

  record["dt"] = chosen.dt;
  record["k"] = format_k(chosen.k);
  record["target"] = to_string(target);
  record["bins"] = o.bins;
  record["min_samples"] = o.min_samples;
  record["train_rows"] = cache.train_rows;
  write_output(fs::path(o.out) / "scheme.json", dump(record));
  out << "scheme: dt=" << chosen.dt << " k=" << format_k(chosen.k) << " (" << record["source"].get<std::string>()
      << ")\n";
  out << "top features:";
  for (std::size_t i = 0; i < std::min<std::size_t>(6, ranking.size()); ++i) out << " " << ranking[i].name;
  out << "\n";
}

void cmd_train(const Options& o, std::ostream& out) {
  check_common(o);
  const auto models = parse_models(o.models);
  const TrainConfig cfg = train_config(o);
  const auto cache = load_panel_cache(o.out);
  const Scheme scheme = load_scheme(o.out);
  const auto train = cache.train();
  const fs::path dir = o.out;

  for (const auto& key : models) {
    const std::string name = display_name(key);
    if (key == "lstm" || key == "lstm_r") {
      std::vector<std::string> features;
      if (key == "lstm_r") features = reduced_features(o, train);
      const auto ds = build_checked([&] { return apply_scheme(train, scheme, scheme_options(o, features)); });
      TrainResult res;
      try {
        res = trendvol::train(ds, cfg);
      } catch (const std::invalid_argument& e) {
        throw InfeasibleScheme(name + ": " + e.what());
      } catch (const TrainingDivergence& e) {
        write_output(dir / ("training_failure_" + key + ".json"),
                     dump({{"model", name}, {"last_finite_epoch", e.last_finite_epoch()}, {"message", e.what()}}));
        throw TrainingDivergence(name + ": " + e.what() + " (last finite epoch " +
                                     std::to_string(e.last_finite_epoch()) + ")",
                                 e.last_finite_epoch());
      }
      LstmModel model;
      model.name = name;
      model.params = res.params;
      model.scheme = scheme;
      model.lag_len = ds.lag_len;
      model.feature_order = ds.feature_order;
      model.stats = ds.stats;
      model.target_scale = ds.target_scale;
      model.config = cfg;
      model.best_epoch = res.best_epoch;
      write_output(dir / ("model_" + key + ".json"), dump(to_json(model)));
      write_output(dir / ("history_" + key + ".csv"), history_csv(res.history));
      out << name << ": " << ds.size() << " windows, " << ds.n_features() << " features, best epoch "
          << res.best_epoch << ", validation MAPE " << text::format_double(res.history[static_cast<std::size_t>(res.best_epoch - 1)].validation_mape)
          << "%\n";
    } else if (key == "garch") {
      const Eigen::VectorXd r = aggregated_returns(train, scheme.dt);
      GarchFitOptions fo;
      fo.seed = o.seed;
      GarchParams p;
      try {
        p = garch_fit(std::span(r.data(), static_cast<std::size_t>(r.size())), fo);
      } catch (const ConvergenceError& e) {
        throw TrainingDivergence(std::string("GARCH: ") + e.what(), -1);
      } catch (const std::invalid_argument& e) {
        throw DataError(std::string("GARCH: ") + e.what());
      }
      json j{{"model", name}, {"kind", "garch"}, {"scheme", scheme_json(scheme)}, {"params", to_json(p)}};
      write_output(dir / "model_garch.json", dump(j));
      out << name << ": omega " << text::format_double(p.omega) << ", alpha " << text::format_double(p.alpha)
          << ", beta " << text::format_double(p.beta) << " on " << p.n << " periods\n";
    } else {
      const Penalty penalty = key == "ridge" ? Penalty::L2 : Penalty::L1;
      const auto ds = build_checked([&] { return apply_scheme(train, scheme, scheme_options(o, {})); });
      LinearSelection sel;
      try {
        sel = select_linear(ds, penalty, default_c_grid());
      } catch (const std::invalid_argument& e) {
        throw InfeasibleScheme(name + ": " + e.what());
      } catch (const std::runtime_error& e) {
        throw TrainingDivergence(name + ": " + e.what(), -1);
      }
      json j{{"model", name},
             {"kind", "linear"},
             {"scheme", scheme_json(scheme)},
             {"lag_len", ds.lag_len},
             {"feature_order", ds.feature_order},
             {"normalization", stats_json(ds.stats)},
             {"target_scale", ds.target_scale},
             {"c_grid", sel.c_grid},
             {"validation_mape", sel.validation_mape},
             {"params", to_json(sel.model)}};
      write_output(dir / ("model_" + key + ".json"), dump(j));
      write_output(dir / ("coefficients_" + key + ".csv"), coefficients_csv(sel.model));
      out << name << ": C " << text::format_double(sel.model.C) << ", " << ds.size() << " windows\n";
    }
  }
}

struct Evaluated {
  std::string name;
  std::vector<double> predictions;
  std::vector<double> targets;
  std::vector<Date> dates;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw EvaluationMismatch(what);
}

Evaluated evaluate_lstm(const json& j, const Scheme& scheme, const PanelCache& cache) {
  LstmModel m;
  try {
    m = lstm_model_from_json(j);
  } catch (const std::exception& e) {
    throw DataError(std::string("bad LSTM model file: ") + e.what());
  }
  require(m.scheme == scheme, m.name + ": trained under scheme (" + std::to_string(m.scheme.dt) + ", " +
                                  format_k(m.scheme.k) + ") but scheme.json selects (" + std::to_string(scheme.dt) +
                                  ", " + format_k(scheme.k) + ")");
  SchemeOptions so;
  so.lag_len = m.lag_len;
  so.features = m.feature_order;
  so.normalize_target = m.target_scale != 1.0;
  std::pair<SchemeDataset, SchemeDataset> ds;
  try {
    ds = apply_scheme(cache.train(), cache.test(), scheme, so);
  } catch (const std::exception& e) {
    throw EvaluationMismatch(m.name + ": " + e.what());
  }
  const auto& [tr, te] = ds;
  require(tr.feature_order == m.feature_order, m.name + ": feature order differs from the panel");
  require(m.params.n_features == te.n_features(), m.name + ": parameter shape does not match the features");
  require(same_stats(tr.stats, stats_json(m.stats)), m.name + ": normalization statistics differ from the panel");
  require(tr.target_scale == m.target_scale, m.name + ": target scale differs from the panel");
  Evaluated e;
  e.name = m.name;
  const auto pred = predict(m.params, te, m.config.teacher_forcing);
  for (std::size_t i = 0; i < te.windows.size(); ++i) {
    e.predictions.push_back(pred[i] * m.target_scale);
    e.targets.push_back(te.windows[i].target * m.target_scale);
    e.dates.push_back(te.windows[i].end_date);
  }
  return e;
}

Evaluated evaluate_linear(const json& j, const Scheme& scheme, const PanelCache& cache) {
  const std::string name = j.value("model", std::string("linear"));
  LinearModel m;
  Scheme trained;
  SchemeOptions so;
  try {
    m = linear_model_from_json(j.at("params"));
    trained = Scheme{j.at("scheme").at("dt").get<int>(), parse_k(j.at("scheme").at("k").get<std::string>())};
    so.lag_len = j.at("lag_len").get<int>();
    so.features = j.at("feature_order").get<std::vector<std::string>>();
    so.normalize_target = j.at("target_scale").get<double>() != 1.0;
  } catch (const std::exception& e) {
    throw DataError(name + ": bad model file: " + e.what());
  }
  require(trained == scheme, name + ": trained under a different scheme than scheme.json");
  std::pair<SchemeDataset, SchemeDataset> ds;
  try {
    ds = apply_scheme(cache.train(), cache.test(), scheme, so);
  } catch (const std::exception& e) {
    throw EvaluationMismatch(name + ": " + e.what());
  }
  const auto& [tr, te] = ds;
  require(same_stats(tr.stats, j.at("normalization")), name + ": normalization statistics differ from the panel");
  require(tr.target_scale == j.at("target_scale").get<double>(), name + ": target scale differs from the panel");
  const auto lag = build_lag_matrix(te);
  require(lag.columns == m.columns, name + ": lag columns differ from the model");
  const Eigen::VectorXd pred = m.predict(lag.X);
  Evaluated e;
  e.name = name;
  for (std::size_t i = 0; i < te.windows.size(); ++i) {
    e.predictions.push_back(pred(static_cast<Eigen::Index>(i)) * tr.target_scale);
    e.targets.push_back(te.windows[i].target * tr.target_scale);
    e.dates.push_back(te.windows[i].end_date);
  }
  return e;
}

Evaluated evaluate_garch(const json& j, const Scheme& scheme, const PanelCache& cache, int lag_len) {
  const std::string name = j.value("model", std::string("GARCH"));
  GarchParams p;
  Scheme trained;
  try {
    p = garch_params_from_json(j.at("params"));
    trained = Scheme{j.at("scheme").at("dt").get<int>(), parse_k(j.at("scheme").at("k").get<std::string>())};
  } catch (const std::exception& e) {
    throw DataError(name + ": bad model file: " + e.what());
  }
  require(trained == scheme, name + ": trained under a different scheme than scheme.json");
  const auto train = cache.train(), test = cache.test();
  const Eigen::VectorXd r_tr = aggregated_returns(train, scheme.dt);
  require(static_cast<std::size_t>(r_tr.size()) == p.n, name + ": fitted on a different training panel");
  const Eigen::VectorXd r_te = aggregated_returns(test, scheme.dt);
  Eigen::VectorXd joined(r_tr.size() + r_te.size());
  joined << r_tr, r_te;
  const auto forecast = garch_forecast(p, std::span(joined.data(), static_cast<std::size_t>(joined.size())));

  // The GARCH forecast only needs the target windows; any feature set yields the same ones.
  SchemeOptions so;
  so.lag_len = lag_len;
  so.features = {std::string(kSigmaColumn)};
  const auto te = build_checked([&] { return apply_scheme(train, test, scheme, so).second; });
  Evaluated e;
  e.name = name;
  for (const auto& w : te.windows) {
    e.predictions.push_back(forecast[static_cast<std::size_t>(r_tr.size() + w.end_period + 1)]);
    e.targets.push_back(w.target);
    e.dates.push_back(w.end_date);
  }
  return e;
}

void cmd_evaluate(const Options& o, std::ostream& out, bool models_explicit) {
  check_common(o);
  const auto keys = parse_models(o.models);
  const auto cache = load_panel_cache(o.out);
  const Scheme scheme = load_scheme(o.out);
  const fs::path dir = o.out;

  std::vector<std::pair<std::string, json>> files;
  for (const auto& key : keys) {
    const auto path = dir / ("model_" + key + ".json");
    if (!fs::exists(path)) {
      if (models_explicit) throw DataError("model file not found: " + path.string());
      continue;
    }
    files.emplace_back(key, read_json(path));
  }
  // GARCH has no input window; its test windows follow the lag of the other models.
  int lag_len = o.lag;
  for (const auto& [key, j] : files)
    if (key != "garch" && j.contains("lag_len") && j["lag_len"].is_number_integer()) {
      lag_len = j["lag_len"].get<int>();
      break;
    }

  std::vector<Evaluated> results;
  for (const auto& [key, j] : files) {
    if (key == "lstm" || key == "lstm_r") results.push_back(evaluate_lstm(j, scheme, cache));
    else if (key == "garch") results.push_back(evaluate_garch(j, scheme, cache, lag_len));
    else results.push_back(evaluate_linear(j, scheme, cache));
  }
  if (results.empty()) throw DataError("no trained model files in " + dir.string());
  for (const auto& r : results) {
    require(r.dates == results.front().dates, r.name + ": test windows differ from " + results.front().name);
    for (std::size_t i = 0; i < r.targets.size(); ++i)
      require(std::abs(r.targets[i] - results.front().targets[i]) <= 1e-12 * results.front().targets[i],
              r.name + ": test targets differ from " + results.front().name);
  }

  std::vector<ModelPredictions> preds;
  for (const auto& r : results) preds.push_back({r.name, r.predictions});
  const auto& targets = results.front().targets;
  const auto report = build_report(preds, targets, o.acf_lags, o.mc_reps, o.seed);
  json j = report_json(report);
  j["scheme"] = scheme_json(scheme);
  j["n_test_windows"] = targets.size();
  j["test_start"] = format_date(results.front().dates.front());
  j["test_end"] = format_date(results.front().dates.back());
  write_output(dir / "report.json", dump(j));
  const std::string table = report_table(report);
  write_output(dir / "report.txt", table);

  std::string csv = "window_end,target,prediction,model\n";
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.targets.size(); ++i)
      csv += format_date(r.dates[i]) + "," + text::format_double(r.targets[i]) + "," +
             text::format_double(r.predictions[i]) + "," + r.name + "\n";
  write_output(dir / "predictions.csv", csv);
  out << table;
}

void cmd_synth(const SynthOptions& o, std::ostream& out) {
  try {
    validate(o.synth);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto data = synth_generate(o.synth);
  fs::create_directories(o.out);
  write_output(fs::path(o.out) / "ohlc.csv", write_ohlc_csv(data.ohlc));
  write_output(fs::path(o.out) / "trends.csv", write_trends_csv(data.trends));
  json truth{{"n_days", o.synth.n_days},           {"n_trends", o.synth.n_trends},
             {"n_coupled", o.synth.n_coupled},     {"gamma", o.synth.gamma},
             {"seed", o.synth.seed},               {"garch_omega", o.synth.garch_omega},
             {"garch_alpha", o.synth.garch_alpha}, {"garch_beta", o.synth.garch_beta},
             {"coupled_trends", data.coupled}};
  write_output(fs::path(o.out) / "synth.json", dump(truth));
  out << "wrote " << data.ohlc.size() << " days, " << data.trends.size() << " trends to " << o.out << "\n";
}

// -- argument handling ----------------------------------------------------------

void add_data_options(CLI::App& app, Options& o) {
  app.add_option("--out", o.out, "Working directory for caches, models and reports");
}

void add_panel_options(CLI::App& app, Options& o) {
  app.add_option("--ohlc", o.ohlc, "Daily OHLC CSV");
  app.add_option("--trends", o.trends, "Search-trend CSV");
  app.add_option("--train-frac", o.train_frac, "Chronological training fraction");
}

void add_scheme_options(CLI::App& app, Options& o) {
  app.add_option("--dt", o.dt, "Observation interval in days, or auto");
  app.add_option("--k", o.k, "Normalization window in periods, inf, or auto");
  app.add_option("--dt-grid", o.dt_grid, "Comma-separated dt values scanned when dt is auto");
  app.add_option("--k-grid", o.k_grid, "Comma-separated k values scanned when k is auto");
  app.add_option("--target", o.target, "MI target: volatility or return");
  app.add_option("--bins", o.bins, "Quantile bins per MI marginal");
  app.add_option("--min-samples", o.min_samples, "Minimum MI rows for a selectable scheme");
}

void add_train_options(CLI::App& app, Options& o) {
  app.add_option("--lag", o.lag, "Periods per input window");
  app.add_option("--batch", o.batch, "Mini-batch size");
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--val-frac", o.val_frac, "Validation fraction of training windows");
  app.add_option("--lr", o.lr, "Adam learning rate");
  app.add_option("--cell-dim", o.cell_dim, "LSTM cell dimension");
  app.add_option("--init-constant", o.init_constant, "Initial weight value");
  app.add_option("--validation", o.validation, "Validation split: chronological or random");
  app.add_flag("--teacher-forcing", o.teacher_forcing, "Feed observed volatility instead of predictions");
  app.add_flag("--normalize-target", o.normalize_target, "Scale targets by the mean training target");
  app.add_option("--features", o.features, "Reduced feature list for lstm_r");
}

void add_run_options(CLI::App& app, Options& o) {
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--models", o.models, "Comma-separated models: lstm,lstm_r,garch,ridge,lasso");
}

void add_eval_options(CLI::App& app, Options& o) {
  app.add_option("--mc-reps", o.mc_reps, "Monte Carlo replicates for the normality test");
  app.add_option("--acf-lags", o.acf_lags, "Residual ACF lags");
}

std::map<std::string, std::string> read_config(const std::string& path) {
  const std::string content = read_input(path);
  std::map<std::string, std::string> kv;
  std::size_t n = 0;
  for (auto line : text::lines(content)) {
    ++n;
    line = text::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    std::string key(text::trim(line.substr(0, eq)));
    std::string value(text::trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    kv[key] = value;
  }
  return kv;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  SynthOptions so;
  CLI::App app{"Volatility forecasting from market data and search trends", "trendvol"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");

  auto* ingest = app.add_subcommand("ingest", "Parse inputs, build the panel cache and stationarity report");
  auto* select = app.add_subcommand("select-scheme", "Scan (dt, k) schemes on the training panel");
  auto* train = app.add_subcommand("train", "Train the LSTM models and benchmarks");
  auto* evaluate = app.add_subcommand("evaluate", "Score trained models on the test panel");
  auto* synth = app.add_subcommand("synth", "Generate synthetic OHLC and trend files");
  auto* run_all = app.add_subcommand("run-all", "ingest, select-scheme, train and evaluate in sequence");

  for (auto* sub : {ingest, select, train, evaluate, run_all}) {
    sub->add_option("--config", o.config, "Flat key = value file; flags override it");
    add_data_options(*sub, o);
  }
  for (auto* sub : {ingest, run_all}) add_panel_options(*sub, o);
  for (auto* sub : {select, run_all}) add_scheme_options(*sub, o);
  for (auto* sub : {train, run_all}) add_train_options(*sub, o);
  for (auto* sub : {train, evaluate, run_all}) add_run_options(*sub, o);
  for (auto* sub : {evaluate, run_all}) add_eval_options(*sub, o);
  evaluate->add_option("--lag", o.lag, "Window length for GARCH when no other model is evaluated");

  synth->add_option("--config", so.config, "Flat key = value file; flags override it");
  synth->add_option("--out", so.out, "Output directory");
  synth->add_option("--n-days", so.synth.n_days, "Trading days");
  synth->add_option("--n-trends", so.synth.n_trends, "Trend columns");
  synth->add_option("--n-coupled", so.synth.n_coupled, "Trends carrying planted signal");
  synth->add_option("--gamma", so.synth.gamma, "Coupling strength in [0, 1]");
  synth->add_option("--seed", so.synth.seed, "Random seed");
  synth->add_option("--garch-omega", so.synth.garch_omega, "Variance intercept");
  synth->add_option("--garch-alpha", so.synth.garch_alpha, "Variance persistence");
  synth->add_option("--garch-beta", so.synth.garch_beta, "Squared-return loading");

  int code = kOk;
  std::string command = args.empty() ? std::string() : args.front();
  try {
    // Config values are spliced in after the subcommand unless the flag was given.
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty() && !args.empty()) {
      CLI::App* sub = nullptr;
      for (auto* s : app.get_subcommands({}))
        if (s->get_name() == args.front()) sub = s;
      if (sub) {
        std::vector<std::string> extra;
        for (const auto& [key, value] : read_config(config_path)) {
          const std::string flag = "--" + key;
          bool known = false;
          for (auto* s : app.get_subcommands({})) known |= s->get_option_no_throw(flag) != nullptr;
          if (!known) throw UsageError(config_path + ": unknown key '" + key + "'");
          if (!sub->get_option_no_throw(flag) || given_on_command_line(args, flag)) continue;
          extra.push_back(flag + "=" + value);
        }
        args.insert(args.begin() + 1, extra.begin(), extra.end());
      }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      app.exit(e, out, err);
      return kOk;
    } catch (const CLI::CallForAllHelp& e) {
      app.exit(e, out, err);
      return kOk;
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      return kUsage;
    }

    if (ingest->parsed()) {
      cmd_ingest(o, out);
    } else if (select->parsed()) {
      cmd_select_scheme(o, out);
    } else if (train->parsed()) {
      cmd_train(o, out);
    } else if (evaluate->parsed()) {
      cmd_evaluate(o, out, evaluate->count("--models") > 0);
    } else if (synth->parsed()) {
      cmd_synth(so, out);
    } else if (run_all->parsed()) {
      cmd_ingest(o, out);
      cmd_select_scheme(o, out);
      cmd_train(o, out);
      cmd_evaluate(o, out, run_all->count("--models") > 0);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    code = kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    code = kDataError;
  } catch (const InfeasibleScheme& e) {
    err << "infeasible scheme: " << e.what() << "\n";
    code = kInfeasibleScheme;
  } catch (const TrainingDivergence& e) {
    err << "training failure: " << e.what() << "\n";
    code = kTrainingFailure;
  } catch (const EvaluationMismatch& e) {
    err << "evaluation mismatch: " << e.what() << "\n";
    code = kEvaluationMismatch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kInternalError;
  }

  const std::string log_dir = command == "synth" ? so.out : o.out;
  if (code != kUsage && fs::is_directory(log_dir)) {
    std::ofstream log(fs::path(log_dir) / "run.log", std::ios::app);
    log << timestamp() << " " << command << " exit=" << code << "\n";
  }
  return code;
}

}  // namespace trendvol::cli
