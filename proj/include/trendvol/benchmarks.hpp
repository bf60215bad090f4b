#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trendvol/scheme.hpp"

namespace trendvol {

// -- Nelder-Mead ------------------------------------------------------------

struct NelderMeadOptions {
  int max_iterations = 5000;
  double f_tolerance = 1e-10;  // spread of simplex values, relative to |f| + 1e-12
  double x_tolerance = 1e-8;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                             const NelderMeadOptions& options = {});

// -- GARCH(1,1) -------------------------------------------------------------

/// sigma_i^2 = omega + alpha * sigma_{i-1}^2 + beta * r_{i-1}^2, r_i = sigma_i * eps_i.
/// `alpha` is the persistence on the lagged variance, `beta` the loading on the
/// lagged squared return.
struct GarchParams {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double log_likelihood = 0.0;
  double initial_variance = 0.0;  // sigma_0^2: sample variance of the fitted series
  std::size_t n = 0;
};

struct GarchFitOptions {
  int restarts = 5;
  std::uint64_t seed = 0;
  NelderMeadOptions optimizer{};
};

/// Gaussian log-likelihood of the recursion started at `initial_variance`.
double garch_log_likelihood(std::span<const double> returns, double omega, double alpha, double beta,
                            double initial_variance);

GarchParams garch_fit(std::span<const double> returns, const GarchFitOptions& options = {});

/// out[i] = sqrt(sigma_i^2) computed from returns[0..i-1] only; out[0] is
/// sqrt(initial_variance). Length returns.size() + 1.
std::vector<double> garch_forecast(const GarchParams& params, std::span<const double> returns);

/// Simulates r_i under the recursion, starting from the unconditional variance.
std::vector<double> garch_simulate(double omega, double alpha, double beta, std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const GarchParams& p);
GarchParams garch_params_from_json(const nlohmann::json& j);

// -- lagged linear models ---------------------------------------------------

struct LagMatrix {
  Eigen::MatrixXd X;  // windows x (lag_len * n_features), lag-major, lag 1 most recent
  Eigen::VectorXd y;
  std::vector<std::string> columns;
};

LagMatrix build_lag_matrix(const SchemeDataset& dataset);

enum class Penalty { L1 = 1, L2 = 2 };

struct LinearFitOptions {
  double tolerance = 1e-10;  // max coefficient change per sweep (L1)
  int max_sweeps = 10000;
};

/// Minimizes (C/p) * ||w||_p^p + sum(residual^2) with an unpenalized intercept:
/// C * ||w||_1 for Lasso, (C/2) * ||w||_2^2 for Ridge.
struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // laid out like LagMatrix columns
  std::vector<std::string> columns;
  Penalty penalty = Penalty::L2;
  double C = 0.0;
  double residual_variance = 0.0;
  int sweeps = 0;

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
};

LinearModel fit_linear(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                       Penalty penalty, double C, const LinearFitOptions& options = {});

/// (C/p) * ||w||_p^p + sum of squared residuals.
double linear_objective(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                        double intercept, const Eigen::Ref<const Eigen::VectorXd>& w, Penalty penalty, double C);

/// Five points, log-spaced from 1e-2 down to 1e-6.
std::vector<double> default_c_grid();

struct LinearSelection {
  LinearModel model;
  std::vector<double> c_grid;
  std::vector<double> validation_mape;  // NaN where the fit failed
  std::size_t n_fit = 0;
  std::size_t n_validation = 0;
};

/// Fits each C on the first 80% of windows and keeps the lowest MAPE on the rest.
LinearSelection select_linear(const SchemeDataset& train_set, Penalty penalty, const std::vector<double>& c_grid,
                              double fit_fraction = 0.8);

std::string coefficients_csv(const LinearModel& model);
nlohmann::json to_json(const LinearModel& m);
LinearModel linear_model_from_json(const nlohmann::json& j);

}  // namespace trendvol
