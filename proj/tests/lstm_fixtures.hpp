#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "trendvol/lstm.hpp"

namespace trendvol::testing {

inline LstmParams random_params(int n_features, int cell_dim, std::mt19937_64& rng, double sd = 0.5) {
  std::normal_distribution<double> z(0.0, sd);
  LstmParams p = LstmParams::zeros(n_features, cell_dim);
  Eigen::VectorXd flat(p.size());
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = z(rng);
  p.unpack(flat);
  return p;
}

/// One gradient-check instance: random parameters, N(0, 1) inputs, seed sigma
/// in [0.5, 1.5], target in [0.5, 2] kept away from the loss kink.
struct GradInstance {
  LstmParams params;
  Eigen::MatrixXd window;
  double seed_sigma = 1.0;
  double target = 1.0;
};

inline GradInstance grad_instance(std::uint64_t seed, int cell_dim, int lag_len = 10, int n_features = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> useed(0.5, 1.5), utarget(0.5, 2.0);
  GradInstance g;
  g.params = random_params(n_features, cell_dim, rng);
  g.window.resize(lag_len, n_features);
  for (Eigen::Index i = 0; i < g.window.size(); ++i) g.window.data()[i] = z(rng);
  g.seed_sigma = useed(rng);
  const double pred = forward_window(g.params, g.window, g.seed_sigma);
  do g.target = utarget(rng);
  while (std::abs(pred - g.target) / g.target <= 1e-3);
  return g;
}

/// Largest relative error between the analytic gradient and central
/// differences with step 1e-5 * max(1, |theta|).
inline double max_grad_rel_error(const GradInstance& g) {
  const Eigen::VectorXd analytic = grad_window(g.params, g.window, g.seed_sigma, g.target).grad.pack();
  const Eigen::VectorXd theta = g.params.pack();
  LstmParams probe = g.params;
  auto loss_at = [&](const Eigen::VectorXd& t) {
    probe.unpack(t);
    return std::abs(forward_window(probe, g.window, g.seed_sigma) - g.target) / g.target;
  };
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta(i)));
    Eigen::VectorXd plus = theta, minus = theta;
    plus(i) += h;
    minus(i) -= h;
    const double numeric = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic(i)), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic(i)) / denom);
  }
  return worst;
}

/// 16 windows whose targets come from a fixed teacher network, so an exact fit exists.
inline SchemeDataset memorization_dataset(std::uint64_t seed = 7, int lag_len = 10, int n_features = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> useed(0.8, 1.2);
  LstmParams teacher = random_params(n_features, 1, rng);
  teacher.alpha = 1.0;
  teacher.beta.setConstant(0.4);
  SchemeDataset ds;
  ds.scheme = Scheme{1, std::nullopt};
  ds.lag_len = lag_len;
  for (int f = 0; f < n_features; ++f) ds.feature_order.push_back("x" + std::to_string(f));
  for (int n = 0; n < 16; ++n) {
    SampleWindow w;
    w.inputs.resize(lag_len, n_features);
    for (Eigen::Index i = 0; i < w.inputs.size(); ++i) w.inputs.data()[i] = z(rng);
    w.seed_sigma = useed(rng);
    w.raw_sigma = Eigen::VectorXd::Constant(lag_len, w.seed_sigma);
    w.target = forward_window(teacher, w.inputs, w.seed_sigma);
    w.end_period = n;
    ds.windows.push_back(std::move(w));
  }
  return ds;
}

inline TrainConfig memorization_config() {
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.batch_size = 16;
  cfg.lr = 1e-2;
  cfg.seed = 11;
  return cfg;
}

}  // namespace trendvol::testing
