#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trendvol/cli.hpp"
#include "trendvol/text.hpp"

namespace fs = std::filesystem;
using namespace trendvol;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = trendvol::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("trendvol_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return text::read_file(p); }

json load(const fs::path& p) { return json::parse(slurp(p)); }

// Synthetic inputs plus an ingested panel cache under dir/run.
fs::path prepared(const std::string& name, int n_days = 1200) {
  const auto dir = fresh_dir(name);
  REQUIRE(call({"synth", "--out", (dir / "data").string(), "--n-days", std::to_string(n_days), "--seed", "5"}).code ==
          0);
  const auto r = call({"ingest", "--ohlc", (dir / "data/ohlc.csv").string(), "--trends",
                      (dir / "data/trends.csv").string(), "--out", (dir / "run").string()});
  REQUIRE(r.code == 0);
  return dir;
}

}  // namespace

TEST_CASE("synth and ingest") {
  const auto dir = prepared("ingest", 1500);
  const auto run = dir / "run";
  for (const char* f : {"panel.csv", "panel.json", "stationarity.csv", "run.log"}) CHECK(fs::exists(run / f));

  const auto meta = load(run / "panel.json");
  CHECK(meta["feature_order"].size() == 25);
  CHECK(meta["n_rows"] == 1499);
  CHECK(meta["train_rows"] == 1049);

  const auto stationarity = slurp(run / "stationarity.csv");
  const auto rows = text::lines(stationarity);
  REQUIRE(rows.size() == 26);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(text::split(rows[i], ',').back() == "1");

  SUBCASE("same seed gives identical files") {
    REQUIRE(call({"synth", "--out", (dir / "again").string(), "--n-days", "1500", "--seed", "5"}).code == 0);
    CHECK(slurp(dir / "again/ohlc.csv") == slurp(dir / "data/ohlc.csv"));
    CHECK(slurp(dir / "again/trends.csv") == slurp(dir / "data/trends.csv"));
  }
  SUBCASE("timestamps only in the log") {
    CHECK(slurp(run / "run.log").find("ingest exit=0") != std::string::npos);
    CHECK(slurp(run / "panel.json").find("T0") == std::string::npos);
  }
}

TEST_CASE("exit codes") {
  const auto dir = fresh_dir("codes");
  REQUIRE(call({"synth", "--out", (dir / "data").string(), "--n-days", "600"}).code == 0);

  SUBCASE("missing trend file names the path") {
    const auto missing = (dir / "missing_trends.csv").string();
    const auto r = call({"ingest", "--ohlc", (dir / "data/ohlc.csv").string(), "--trends", missing, "--out",
                        (dir / "run").string()});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find(missing) != std::string::npos);
  }
  SUBCASE("malformed OHLC reports file and line") {
    auto csv = slurp(dir / "data/ohlc.csv");
    const auto third = csv.find('\n', csv.find('\n', csv.find('\n') + 1) + 1);
    csv.insert(third + 1, "2030-01-01,1,0.5,2,1,1\n");
    text::write_file(dir / "bad.csv", csv);
    const auto r = call({"ingest", "--ohlc", (dir / "bad.csv").string(), "--trends", (dir / "data/trends.csv").string(),
                        "--out", (dir / "run").string()});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find("bad.csv") != std::string::npos);
    CHECK(r.err.find("line 4") != std::string::npos);
  }
  SUBCASE("usage errors") {
    CHECK(call({}).code == cli::kUsage);
    CHECK(call({"frobnicate"}).code == cli::kUsage);
    CHECK(call({"train", "--epochs", "many"}).code == cli::kUsage);
    CHECK(call({"select-scheme", "--out", (dir / "run").string(), "--dt-grid", ""}).code == cli::kUsage);
    CHECK(call({"select-scheme", "--out", (dir / "run").string(), "--k", "auto", "--k-grid", " , "}).code ==
          cli::kUsage);
    CHECK(call({"select-scheme", "--out", (dir / "run").string(), "--dt", "0", "--k", "inf"}).code == cli::kUsage);
    CHECK(call({"train", "--out", (dir / "run").string(), "--models", "lstm,svm"}).code == cli::kUsage);
  }
  SUBCASE("invalid synth config") {
    text::write_file(dir / "bad.cfg", "gamma = -0.5\n");
    CHECK(call({"synth", "--config", (dir / "bad.cfg").string(), "--out", (dir / "s").string()}).code == cli::kUsage);
    text::write_file(dir / "bad2.cfg", "n_days = 20\n");
    CHECK(call({"synth", "--config", (dir / "bad2.cfg").string(), "--out", (dir / "s").string()}).code == cli::kUsage);
    CHECK(call({"synth", "--out", (dir / "s").string(), "--garch-alpha", "0.9", "--garch-beta", "0.2"}).code ==
          cli::kUsage);
  }
  SUBCASE("stage run before its inputs exist") {
    CHECK(call({"select-scheme", "--out", (dir / "nothing").string(), "--dt", "3", "--k", "inf"}).code ==
          cli::kDataError);
  }
}

TEST_CASE("select-scheme") {
  const auto dir = prepared("select", 1500);
  const auto run = (dir / "run").string();

  SUBCASE("explicit scheme skips the scan") {
    const auto r = call({"select-scheme", "--out", run, "--dt", "3", "--k", "inf"});
    REQUIRE(r.code == 0);
    const auto s = load(dir / "run/scheme.json");
    CHECK(s["dt"] == 3);
    CHECK(s["k"] == "inf");
    CHECK(s["source"] == "explicit");
    CHECK_FALSE(fs::exists(dir / "run/grid_volatility.csv"));
    CHECK(fs::exists(dir / "run/ranking.csv"));
  }
  SUBCASE("auto scan writes both grids; return sums stay below volatility sums") {
    const auto r = call({"select-scheme", "--out", run, "--dt-grid", "1,2,3", "--k-grid", "10,inf", "--min-samples",
                        "300"});
    REQUIRE(r.code == 0);
    const auto vol_csv = slurp(dir / "run/grid_volatility.csv"), ret_csv = slurp(dir / "run/grid_return.csv");
    const auto vol = text::lines(vol_csv), ret = text::lines(ret_csv);
    REQUIRE(vol.size() == ret.size());
    REQUIRE(vol.size() >= 2);
    for (std::size_t i = 1; i < vol.size(); ++i) {
      const auto a = text::split(vol[i], ','), b = text::split(ret[i], ',');
      REQUIRE(a[0] == b[0]);
      REQUIRE(a[1] == b[1]);
      double va = 0, vb = 0;
      if (!text::parse_double(a[2], va) || !text::parse_double(b[2], vb) || std::isnan(va)) continue;
      CHECK(vb < va);
    }
    const auto s = load(dir / "run/scheme.json");
    CHECK(s["source"] == "auto");
    CHECK(s["n_samples"].get<int>() >= 300);
  }
  SUBCASE("nothing meets min-samples") {
    CHECK(call({"select-scheme", "--out", run, "--dt-grid", "5", "--k-grid", "inf", "--min-samples", "100000"}).code ==
          cli::kInfeasibleScheme);
  }
  SUBCASE("reduced features naming a missing column") {
    REQUIRE(call({"select-scheme", "--out", run, "--dt", "3", "--k", "inf"}).code == 0);
    CHECK(call({"train", "--out", run, "--models", "lstm_r", "--features", "volatility,nosuch", "--epochs", "2"})
              .code == cli::kDataError);
  }
}

TEST_CASE("train and evaluate") {
  const auto dir = prepared("train");
  const auto run = (dir / "run").string();
  REQUIRE(call({"select-scheme", "--out", run, "--dt", "3", "--k", "inf"}).code == 0);

  SUBCASE("model selection writes only the requested files") {
    REQUIRE(call({"train", "--out", run, "--models", "lstm,garch", "--epochs", "5", "--seed", "7"}).code == 0);
    int models = 0;
    for (const auto& e : fs::directory_iterator(run))
      if (e.path().filename().string().rfind("model_", 0) == 0) ++models;
    CHECK(models == 2);
    CHECK(fs::exists(dir / "run/model_lstm.json"));
    CHECK(fs::exists(dir / "run/model_garch.json"));
    CHECK(fs::exists(dir / "run/history_lstm.csv"));

    const auto first = slurp(dir / "run/model_lstm.json");
    REQUIRE(call({"train", "--out", run, "--models", "lstm,garch", "--epochs", "5", "--seed", "7"}).code == 0);
    CHECK(slurp(dir / "run/model_lstm.json") == first);

    const auto r = call({"evaluate", "--out", run, "--mc-reps", "100"});
    REQUIRE(r.code == 0);
    const auto report = load(dir / "run/report.json");
    CHECK(report["models"].size() == 2);
    const auto preds_csv = slurp(dir / "run/predictions.csv");
    const auto preds = text::lines(preds_csv);
    CHECK(preds.front() == "window_end,target,prediction,model");
    CHECK(preds.size() == 1 + 2 * report["n_test_windows"].get<std::size_t>());
  }
  SUBCASE("reduced feature list") {
    REQUIRE(call({"train", "--out", run, "--models", "lstm_r", "--features", "volatility,return", "--epochs", "5"})
                .code == 0);
    const auto m = load(dir / "run/model_lstm_r.json");
    CHECK(m["params"]["n_features"] == 2);
    CHECK(m["feature_order"] == json({"sigma", "r"}));
    CHECK(m["model"] == "LSTM_r");
  }
  SUBCASE("scheme mismatch at evaluation") {
    REQUIRE(call({"train", "--out", run, "--models", "lstm,ridge", "--epochs", "3"}).code == 0);
    REQUIRE(call({"select-scheme", "--out", run, "--dt", "2", "--k", "inf"}).code == 0);
    const auto r = call({"evaluate", "--out", run, "--mc-reps", "100"});
    CHECK(r.code == cli::kEvaluationMismatch);
    CHECK(r.err.find("scheme") != std::string::npos);
  }
  SUBCASE("altered normalization statistics") {
    REQUIRE(call({"train", "--out", run, "--models", "lasso", "--epochs", "3"}).code == 0);
    auto m = load(dir / "run/model_lasso.json");
    m["normalization"]["mean"][0] = m["normalization"]["mean"][0].get<double>() + 1e-9;
    text::write_file(dir / "run/model_lasso.json", m.dump(2));
    CHECK(call({"evaluate", "--out", run, "--models", "lasso", "--mc-reps", "100"}).code ==
          cli::kEvaluationMismatch);
  }
  SUBCASE("requested model file missing") {
    CHECK(call({"evaluate", "--out", run, "--models", "ridge"}).code == cli::kDataError);
  }
  SUBCASE("divergent training") {
    const auto r = call({"train", "--out", run, "--models", "lstm", "--epochs", "5", "--init-constant", "1e306"});
    CHECK(r.code == cli::kTrainingFailure);
    CHECK(r.err.find("last finite epoch") != std::string::npos);
    CHECK(fs::exists(dir / "run/training_failure_lstm.json"));
  }
}

TEST_CASE("config file") {
  const auto dir = prepared("config");
  const auto run = (dir / "run").string();
  text::write_file(dir / "pipeline.cfg",
                   "# pipeline settings\n"
                   "dt = 3\n"
                   "k = inf\n"
                   "epochs = 4\n"
                   "models = lstm\n"
                   "teacher_forcing = true\n"
                   "mc_reps = 50\n");
  const auto cfg = (dir / "pipeline.cfg").string();
  REQUIRE(call({"select-scheme", "--config", cfg, "--out", run}).code == 0);
  CHECK(load(dir / "run/scheme.json")["dt"] == 3);

  REQUIRE(call({"train", "--config", cfg, "--out", run, "--epochs", "2"}).code == 0);
  const auto m = load(dir / "run/model_lstm.json");
  CHECK(m["train_config"]["epochs"] == 2);
  CHECK(m["train_config"]["teacher_forcing"] == true);
  CHECK_FALSE(fs::exists(dir / "run/model_garch.json"));

  text::write_file(dir / "typo.cfg", "epoch = 4\n");
  CHECK(call({"train", "--config", (dir / "typo.cfg").string(), "--out", run}).code == cli::kUsage);
  CHECK(call({"train", "--config", (dir / "absent.cfg").string(), "--out", run}).code == cli::kDataError);
}
