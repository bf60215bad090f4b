#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "support.hpp"
#include "trendvol/error.hpp"
#include "trendvol/infometrics.hpp"

using namespace trendvol;
using trendvol::testing::normal_sample;
using trendvol::testing::uniform_sample;

namespace {

// Plug-in MI from rank bins floor(rank * B / n); matches equal-frequency
// binning when n is a multiple of B and values are distinct.
double mi_oracle(const std::vector<double>& x, const std::vector<double>& y, int B) {
  const std::size_t n = x.size();
  auto rank_bins = [&](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<int> bin(n);
    for (std::size_t r = 0; r < n; ++r) bin[idx[r]] = static_cast<int>(r * static_cast<std::size_t>(B) / n);
    return bin;
  };
  const auto bx = rank_bins(x), by = rank_bins(y);
  std::vector<long double> joint(static_cast<std::size_t>(B * B), 0), px(static_cast<std::size_t>(B), 0),
      py(static_cast<std::size_t>(B), 0);
  for (std::size_t i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(bx[i] * B + by[i])] += 1;
    px[static_cast<std::size_t>(bx[i])] += 1;
    py[static_cast<std::size_t>(by[i])] += 1;
  }
  long double mi = 0;
  for (int a = 0; a < B; ++a)
    for (int b = 0; b < B; ++b) {
      const long double c = joint[static_cast<std::size_t>(a * B + b)];
      if (c > 0) mi += c / n * std::log(c * n / (px[static_cast<std::size_t>(a)] * py[static_cast<std::size_t>(b)]));
    }
  return static_cast<double>(std::max<long double>(mi, 0));
}

MiGrid hand_grid(std::vector<int> dts, std::vector<std::optional<int>> ks, Eigen::MatrixXd values, Eigen::MatrixXi n) {
  MiGrid g;
  g.dt_values = std::move(dts);
  g.k_values = std::move(ks);
  g.feasible = values.array().isFinite();
  g.values = std::move(values);
  g.n_samples = std::move(n);
  return g;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("quantile_bins") {
  const std::vector<double> four{1, 2, 3, 4};
  const auto b = quantile_bins(four, 2);
  REQUIRE(b.thresholds.size() == 1);
  CHECK(b.edges[0] == 2.5);
  CHECK(b.bin_of(1) == 0);
  CHECK(b.bin_of(2) == 0);
  CHECK(b.bin_of(3) == 1);
  CHECK(b.bin_of(4) == 1);
  CHECK_FALSE(b.merged());

  const std::vector<double> flat(50, 7.0);
  const auto m = quantile_bins(flat, 10);
  CHECK(m.effective == 1);
  CHECK(m.merged());

  CHECK_THROWS_AS(quantile_bins(four, 5), std::invalid_argument);
  CHECK_THROWS_AS(quantile_bins(four, 1), std::invalid_argument);

  const auto u = uniform_sample(10000, 99);
  const auto ub = quantile_bins(u, 10);
  std::vector<int> counts(10, 0);
  for (double v : u) ++counts[static_cast<std::size_t>(ub.bin_of(v))];
  for (int c : counts) {
    CHECK(c >= 900);
    CHECK(c <= 1100);
  }

  SUBCASE("counts within one of n / B for distinct values") {
    const auto v = normal_sample(1237, 4);
    for (int B : {2, 3, 7, 10}) {
      const auto q = quantile_bins(v, B);
      std::vector<int> c(static_cast<std::size_t>(B), 0);
      for (double x : v) ++c[static_cast<std::size_t>(q.bin_of(x))];
      const double target = 1237.0 / B;
      for (int k : c) CHECK(std::abs(k - target) <= 1.0);
    }
  }
}

TEST_CASE("mutual_information") {
  const auto x = uniform_sample(10000, 1);
  const auto y = uniform_sample(10000, 2);

  CHECK(mutual_information(x, y, 10).value < 0.02);
  const auto same = mutual_information(x, x, 10);
  CHECK(std::abs(same.value - std::log(10.0)) < 0.01 * std::log(10.0));
  CHECK(same.n_samples == 10000);
  CHECK_FALSE(same.undersampled);

  SUBCASE("matches the rank-bin oracle") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
      const auto a = normal_sample(10000, seed);
      auto b = normal_sample(10000, seed + 100);
      for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.7 * a[i];
      CHECK(std::abs(mutual_information(a, b, 10).value - mi_oracle(a, b, 10)) < 1e-12);
    }
  }
  SUBCASE("symmetric bit-exactly") {
    auto b = normal_sample(3000, 8);
    const auto a = normal_sample(3000, 9);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.3 * a[i] * a[i];
    CHECK(mutual_information(a, b, 10).value == mutual_information(b, a, 10).value);
    CHECK(mutual_information(a, b, 7, BiasCorrection::MillerMadow).value ==
          mutual_information(b, a, 7, BiasCorrection::MillerMadow).value);
  }
  SUBCASE("monotone transforms leave the estimate unchanged") {
    const auto a = normal_sample(5000, 10);
    auto b = normal_sample(5000, 11);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += a[i];
    const double base = mutual_information(a, b, 10).value;
    std::vector<double> ea(a.size()), fb(b.size());
    std::transform(a.begin(), a.end(), ea.begin(), [](double v) { return std::exp(v); });
    std::transform(b.begin(), b.end(), fb.begin(), [](double v) { return -3.0 + 0.25 * v; });
    CHECK(mutual_information(ea, b, 10).value == base);
    CHECK(mutual_information(a, fb, 10).value == base);
    CHECK(mutual_information(ea, fb, 10).value == base);
  }
  SUBCASE("noisy copy beats shuffled copy") {
    auto noisy = x;
    const auto eps = normal_sample(x.size(), 12, 0.0, 0.05);
    for (std::size_t i = 0; i < x.size(); ++i) noisy[i] += eps[i];
    auto shuffled = x;
    std::mt19937_64 rng(13);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(mutual_information(x, noisy, 10).value > mutual_information(x, shuffled, 10).value);
  }
  SUBCASE("bounds and bias correction") {
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
      const auto a = normal_sample(400, seed);
      const auto b = normal_sample(400, seed + 50);
      const auto plain = mutual_information(a, b, 10);
      CHECK(plain.value >= 0.0);
      CHECK(plain.value <= std::log(10.0));
      CHECK(plain.undersampled);
      CHECK(mutual_information(a, b, 10, BiasCorrection::MillerMadow).value <= plain.value);
    }
  }
  CHECK_THROWS_AS(mutual_information(std::vector<double>(100, 0), std::vector<double>(99, 0), 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(mutual_information(uniform_sample(99, 1), uniform_sample(99, 2), 10), std::invalid_argument);
}

TEST_CASE("parse_target_kind") {
  CHECK(parse_target_kind("return") == TargetKind::Return);
  CHECK(parse_target_kind("volatility") == TargetKind::Volatility);
  CHECK(to_string(TargetKind::Volatility) == "volatility");
  CHECK_THROWS_AS(parse_target_kind("price"), std::invalid_argument);
}

TEST_CASE("panel_mi") {
  const auto v = normal_sample(2000, 31);
  const Eigen::Map<const Eigen::VectorXd> y(v.data(), 2000);
  Eigen::MatrixXd f(2000, 3);
  f.col(0) = y;
  f.col(1) = y + Eigen::Map<const Eigen::VectorXd>(normal_sample(2000, 32).data(), 2000);
  f.col(2) = Eigen::Map<const Eigen::VectorXd>(normal_sample(2000, 33).data(), 2000);

  const auto one = panel_mi(f.leftCols(1), y, 10);
  CHECK(one.feasible);
  CHECK(one.sum == one.per_feature[0]);

  const auto all = panel_mi(f, y, 10);
  double manual = 0.0;
  for (Eigen::Index c = 0; c < 3; ++c) {
    const Eigen::VectorXd col = f.col(c);
    manual += mutual_information(std::span(col.data(), 2000), v, 10).value;
    CHECK(all.per_feature[static_cast<std::size_t>(c)] ==
          mutual_information(std::span(col.data(), 2000), v, 10).value);
  }
  CHECK(all.sum == manual);

  Eigen::MatrixXd permuted(2000, 3);
  permuted << f.col(2), f.col(0), f.col(1);
  CHECK(std::abs(panel_mi(permuted, y, 10).sum - all.sum) < 1e-15);

  const auto small = panel_mi(f.topRows(50), y.head(50), 10);
  CHECK_FALSE(small.feasible);
  CHECK(small.n_samples == 50);
}

TEST_CASE("scheme_mi_rows alignment") {
  const auto panel = trendvol::testing::random_panel(300, 2, 5);
  const auto rows = scheme_mi_rows(panel, Scheme{2, std::nullopt}, TargetKind::Volatility);
  const auto agg = aggregate_panel(panel, 2);
  const auto s = sample_stats(agg.values.col(1));
  REQUIRE(rows.target.size() == agg.periods() - 1);
  for (Eigen::Index i = 0; i < rows.target.size(); ++i) {
    CHECK(std::abs(rows.target(i) - (agg.values(i + 1, 1) - s.mean) / s.std) < 1e-12);
    CHECK(std::abs(rows.features(i, 1) - (agg.values(i, 1) - s.mean) / s.std) < 1e-12);
  }
  const auto finite = scheme_mi_rows(panel, Scheme{1, 20}, TargetKind::Return);
  CHECK(finite.target.size() == 300 - 20 - 1);
}

TEST_CASE("select_scheme") {
  const std::vector<int> dts{1, 2, 3, 5};
  const std::vector<std::optional<int>> ks{10, 30, std::nullopt};

  SUBCASE("forced choice") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(4, 3, kNaN);
    v(2, 1) = 0.3;
    const auto g = hand_grid(dts, ks, v, Eigen::MatrixXi::Constant(4, 3, 500));
    CHECK(select_scheme(g, 100) == Scheme{3, 30});
  }
  SUBCASE("ties go to smaller dt then larger k") {
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(4, 3, 0.1);
    v(1, 0) = 0.5;
    v(3, 0) = 0.5;
    CHECK(select_scheme(hand_grid(dts, ks, v, Eigen::MatrixXi::Constant(4, 3, 500)), 1) == Scheme{2, 10});
    v(1, 2) = 0.5;
    CHECK(select_scheme(hand_grid(dts, ks, v, Eigen::MatrixXi::Constant(4, 3, 500)), 1) == Scheme{2, std::nullopt});
  }
  SUBCASE("minimum sample constraint") {
    // Sample counts shrink with dt as on a real panel; the MI peak sits at dt = 5.
    Eigen::MatrixXd v(4, 3);
    v << 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3;
    Eigen::MatrixXi n(4, 3);
    n << 2700, 2680, 2699, 1350, 1330, 1349, 900, 880, 899, 540, 520, 539;
    const auto g = hand_grid(dts, ks, v, n);
    CHECK(select_scheme(g, 0) == Scheme{5, std::nullopt});
    CHECK(select_scheme(g, 1000) == Scheme{2, std::nullopt});
    CHECK(select_scheme(g, 890) == Scheme{3, std::nullopt});
    CHECK_THROWS_AS(select_scheme(g, 5000), InfeasibleScheme);
  }
  SUBCASE("never violates the constraint on random grids") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> cnt(50, 3000);
    for (int rep = 0; rep < 200; ++rep) {
      Eigen::MatrixXd v(4, 3);
      Eigen::MatrixXi n(4, 3);
      for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) {
          v(i, j) = u(rng) < 0.2 ? kNaN : u(rng);
          n(i, j) = cnt(rng);
        }
      const auto g = hand_grid(dts, ks, v, n);
      const std::size_t min_samples = 1000;
      bool any = false;
      for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) any |= g.feasible(i, j) && n(i, j) >= 1000;
      if (!any) {
        CHECK_THROWS_AS(select_scheme(g, min_samples), InfeasibleScheme);
        continue;
      }
      const auto s = select_scheme(g, min_samples);
      const auto i = std::find(dts.begin(), dts.end(), s.dt) - dts.begin();
      const auto j = std::find(ks.begin(), ks.end(), s.k) - ks.begin();
      CHECK(g.feasible(i, j));
      CHECK(n(i, j) >= 1000);
      for (Eigen::Index a = 0; a < 4; ++a)
        for (Eigen::Index b = 0; b < 3; ++b)
          if (g.feasible(a, b) && n(a, b) >= 1000) CHECK(v(a, b) <= v(i, j));
    }
  }
}

TEST_CASE("scan_grid") {
  SynthConfig cfg;
  cfg.n_days = 1500;
  cfg.n_trends = 4;
  cfg.n_coupled = 2;
  const auto data = synth_generate(cfg);
  const auto panel = assemble_panel(data.ohlc, data.trends);

  const auto one = scan_grid(panel, {3}, {std::nullopt}, TargetKind::Volatility, 10);
  CHECK(one.values(0, 0) == scheme_mi(panel, Scheme{3, std::nullopt}, TargetKind::Volatility, 10).sum);

  const std::vector<int> dts{1, 2, 4};
  const std::vector<std::optional<int>> ks{10, 60, std::nullopt};
  const auto vol = scan_grid(panel, dts, ks, TargetKind::Volatility, 10);
  const auto ret = scan_grid(panel, dts, ks, TargetKind::Return, 10);
  CHECK(vol.values.rows() == 3);
  CHECK(vol.values.cols() == 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      if (vol.feasible(i, j)) CHECK(vol.values(i, j) > ret.values(i, j));

  const auto again = scan_grid(panel, dts, ks, TargetKind::Volatility, 10);
  CHECK(grid_csv(again) == grid_csv(vol));

  const auto csv = grid_csv(vol);
  CHECK(csv.rfind("dt,k,mi_sum,n_samples,feasible\n1,10,", 0) == 0);
  CHECK(csv.find("\n4,inf,") != std::string::npos);

  SUBCASE("infeasible cells are recorded") {
    const auto g = scan_grid(panel, {1, 30}, {std::nullopt}, TargetKind::Volatility, 10);
    CHECK(g.feasible(0, 0));
    CHECK_FALSE(g.feasible(1, 0));
    CHECK(std::isnan(g.values(1, 0)));
    CHECK(grid_csv(g).find("30,inf,nan,") != std::string::npos);
    CHECK_THROWS_AS(scan_grid(panel, {60}, {std::nullopt}, TargetKind::Volatility, 10), InfeasibleScheme);
  }
  SUBCASE("scanning consumes only the panel it is given") {
    const auto [train, test] = split_train_test(panel, 0.7);
    auto altered = panel;
    altered.values.bottomRows(test.rows()) *= 2.0;
    const auto a = scan_grid(split_train_test(panel, 0.7).first, dts, ks, TargetKind::Volatility, 10);
    const auto b = scan_grid(split_train_test(altered, 0.7).first, dts, ks, TargetKind::Volatility, 10);
    CHECK(grid_csv(a) == grid_csv(b));
  }
}

TEST_CASE("rank_features") {
  SynthConfig cfg;
  cfg.n_days = 3000;
  const auto data = synth_generate(cfg);
  const auto panel = assemble_panel(data.ohlc, data.trends);
  const Scheme scheme{3, std::nullopt};

  const auto top = rank_features(panel, scheme, TargetKind::Volatility, 10, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].name == "sigma");

  const auto full = rank_features(panel, scheme, TargetKind::Volatility, 10, 1000);
  CHECK(full.size() == 25);
  for (std::size_t i = 1; i < full.size(); ++i) CHECK(full[i - 1].mi >= full[i].mi);

  const auto csv = ranking_csv(full);
  CHECK(csv.rfind("rank,feature,mi\n1,sigma,", 0) == 0);

  SUBCASE("ties keep panel order") {
    Eigen::MatrixXd v(400, 4);
    const auto a = normal_sample(400, 1);
    const auto b = normal_sample(400, 2);
    for (Eigen::Index i = 0; i < 400; ++i) {
      v(i, 0) = a[static_cast<std::size_t>(i)];
      v(i, 1) = std::exp(b[static_cast<std::size_t>(i)]);
      v(i, 2) = b[static_cast<std::size_t>(i)];
      v(i, 3) = b[static_cast<std::size_t>(i)];
    }
    const auto p = trendvol::testing::make_panel(v, {"r", "sigma", "x", "y"});
    const auto r = rank_features(p, Scheme{1, std::nullopt}, TargetKind::Volatility, 10, 4);
    const auto x = std::find_if(r.begin(), r.end(), [](auto& f) { return f.name == "x"; });
    const auto y = std::find_if(r.begin(), r.end(), [](auto& f) { return f.name == "y"; });
    CHECK(x < y);
    CHECK(x->mi == y->mi);
  }
  CHECK_THROWS_AS(rank_features(panel, Scheme{100, std::nullopt}, TargetKind::Volatility, 10, 5), InfeasibleScheme);
}
