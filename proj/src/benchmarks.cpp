#include "trendvol/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "trendvol/error.hpp"
#include "trendvol/lstm.hpp"
#include "trendvol/text.hpp"

namespace trendvol {

// ---------------------------------------------------------------------------
// Nelder-Mead

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                             const NelderMeadOptions& opt) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  for (Eigen::Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += opt.initial_step;
  std::vector<double> fx(simplex.size());
  for (std::size_t i = 0; i < simplex.size(); ++i) fx[i] = f(simplex[i]);
  std::vector<std::size_t> idx(simplex.size());

  NelderMeadResult res;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
    const auto best = idx.front(), worst = idx.back(), second = idx[idx.size() - 2];
    res.iterations = iter;

    double spread = 0.0;
    for (const auto& v : simplex) spread = std::max(spread, (v - simplex[best]).cwiseAbs().maxCoeff());
    if (std::abs(fx[worst] - fx[best]) <= opt.f_tolerance * (std::abs(fx[best]) + 1e-12) && spread <= opt.x_tolerance) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (auto i : idx)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - simplex[worst]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fx[worst] = fe;
      } else {
        simplex[worst] = xr;
        fx[worst] = fr;
      }
      continue;
    }
    if (fr < fx[second]) {
      simplex[worst] = xr;
      fx[worst] = fr;
      continue;
    }
    const bool outside = fr < fx[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                       : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : fx[worst])) {
      simplex[worst] = xc;
      fx[worst] = fc;
      continue;
    }
    for (auto i : idx) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      fx[i] = f(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  res.x = simplex[best];
  res.value = fx[best];
  return res;
}

// ---------------------------------------------------------------------------
// GARCH(1,1)

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct GarchCoords {
  double omega, alpha, beta;
};

// (log omega, logit persistence, logit alpha share) -> constrained params.
GarchCoords decode(const Eigen::VectorXd& z) {
  const double persistence = logistic(z(1));
  const double share = logistic(z(2));
  return {std::exp(z(0)), persistence * share, persistence * (1.0 - share)};
}

Eigen::VectorXd encode(double omega, double alpha, double beta) {
  const double persistence = alpha + beta;
  return Eigen::Vector3d(std::log(omega), logit(persistence), logit(alpha / persistence));
}

}  // namespace

double garch_log_likelihood(std::span<const double> r, double omega, double alpha, double beta,
                            double initial_variance) {
  constexpr double kLog2Pi = 1.8378770664093453;
  double var = initial_variance;
  double ll = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0) var = omega + alpha * var + beta * r[i - 1] * r[i - 1];
    if (!(var > 0.0)) return -std::numeric_limits<double>::infinity();
    ll -= 0.5 * (kLog2Pi + std::log(var) + r[i] * r[i] / var);
  }
  return ll;
}

GarchParams garch_fit(std::span<const double> r, const GarchFitOptions& options) {
  if (r.size() < 50) throw std::invalid_argument("garch_fit: need at least 50 returns");
  const double n = static_cast<double>(r.size());
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double var = 0.0;
  for (double x : r) var += (x - mean) * (x - mean);
  var /= n - 1.0;
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  if (*lo == *hi || !(var > 0.0)) throw std::invalid_argument("garch_fit: constant returns");

  auto nll = [&](const Eigen::VectorXd& z) {
    const auto p = decode(z);
    const double ll = garch_log_likelihood(r, p.omega, p.alpha, p.beta, var);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  const Eigen::VectorXd start = encode(0.1 * var, 0.8, 0.1);
  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    Eigen::VectorXd x0 = start;
    if (attempt > 0)
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += jitter(rng);
    auto res = nelder_mead(nll, x0, options.optimizer);
    // A second pass from the optimum guards against a collapsed simplex.
    auto polish = nelder_mead(nll, res.x, options.optimizer);
    if (polish.value <= res.value) res = polish;
    if (res.value < best.value) best = res;
  }
  if (!best.converged) throw ConvergenceError("garch_fit: Nelder-Mead did not converge");

  const auto p = decode(best.x);
  GarchParams out;
  out.omega = p.omega;
  out.alpha = p.alpha;
  out.beta = p.beta;
  out.log_likelihood = -best.value;
  out.initial_variance = var;
  out.n = r.size();
  return out;
}

std::vector<double> garch_forecast(const GarchParams& p, std::span<const double> r) {
  std::vector<double> out;
  out.reserve(r.size() + 1);
  double var = p.initial_variance;
  out.push_back(std::sqrt(var));
  for (double x : r) {
    var = p.omega + p.alpha * var + p.beta * x * x;
    out.push_back(std::sqrt(var));
  }
  return out;
}

std::vector<double> garch_simulate(double omega, double alpha, double beta, std::size_t n, std::uint64_t seed) {
  if (!(omega > 0.0) || alpha < 0.0 || beta < 0.0 || alpha + beta >= 1.0)
    throw std::invalid_argument("garch_simulate: invalid parameters");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> r(n);
  double var = omega / (1.0 - alpha - beta);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) var = omega + alpha * var + beta * r[i - 1] * r[i - 1];
    r[i] = std::sqrt(var) * normal(rng);
  }
  return r;
}

nlohmann::json to_json(const GarchParams& p) {
  return {{"model", "garch"}, {"kind", "garch"},     {"omega", p.omega},
          {"alpha", p.alpha}, {"beta", p.beta},      {"loglik", p.log_likelihood},
          {"n", p.n},         {"initial_variance", p.initial_variance}};
}

GarchParams garch_params_from_json(const nlohmann::json& j) {
  GarchParams p;
  p.omega = j.at("omega").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.beta = j.at("beta").get<double>();
  p.log_likelihood = j.at("loglik").get<double>();
  p.n = j.at("n").get<std::size_t>();
  p.initial_variance = j.at("initial_variance").get<double>();
  return p;
}

// ---------------------------------------------------------------------------
// linear models

LagMatrix build_lag_matrix(const SchemeDataset& ds) {
  const Eigen::Index F = ds.n_features();
  const int L = ds.lag_len;
  LagMatrix m;
  m.X.resize(static_cast<Eigen::Index>(ds.windows.size()), L * F);
  m.y.resize(static_cast<Eigen::Index>(ds.windows.size()));
  m.columns = lag_column_names(ds.feature_order, L);
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const auto& w = ds.windows[i];
    if (w.inputs.rows() != L || w.inputs.cols() != F) throw std::invalid_argument("build_lag_matrix: inconsistent window shape");
    const auto row = static_cast<Eigen::Index>(i);
    for (int j = 1; j <= L; ++j) m.X.row(row).segment((j - 1) * F, F) = w.inputs.row(L - j);
    m.y(row) = w.target;
  }
  return m;
}

Eigen::VectorXd LinearModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() != coefficients.size()) throw std::invalid_argument("LinearModel::predict: column mismatch");
  return (X * coefficients).array() + intercept;
}

double linear_objective(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                        double intercept, const Eigen::Ref<const Eigen::VectorXd>& w, Penalty penalty, double C) {
  const double sse = ((X * w).array() + intercept - y.array()).square().sum();
  const double pen = penalty == Penalty::L1 ? C * w.lpNorm<1>() : 0.5 * C * w.squaredNorm();
  return pen + sse;
}

LinearModel fit_linear(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                       Penalty penalty, double C, const LinearFitOptions& options) {
  if (X.rows() == 0 || X.rows() != y.size()) throw std::invalid_argument("fit_linear: empty or mismatched inputs");
  if (!(C > 0.0)) throw std::invalid_argument("fit_linear: C must be > 0");
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel model;
  model.penalty = penalty;
  model.C = C;
  if (penalty == Penalty::L2) {
    Eigen::MatrixXd A = Xc.transpose() * Xc;
    A.diagonal().array() += 0.5 * C;
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw std::domain_error("fit_linear: singular regularized system");
    model.coefficients = llt.solve(Xc.transpose() * yc);
    if (!model.coefficients.allFinite()) throw std::domain_error("fit_linear: singular regularized system");
  } else {
    const Eigen::Index p = X.cols();
    const Eigen::VectorXd col_sq = Xc.colwise().squaredNorm();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd resid = yc;
    const double threshold = 0.5 * C;
    bool converged = false;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (col_sq(j) == 0.0) continue;
        const double rho = Xc.col(j).dot(resid) + col_sq(j) * w(j);
        const double shrunk = rho > threshold ? rho - threshold : (rho < -threshold ? rho + threshold : 0.0);
        const double next = shrunk / col_sq(j);
        const double delta = next - w(j);
        if (delta != 0.0) {
          resid.noalias() -= delta * Xc.col(j);
          w(j) = next;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      model.sweeps = sweep;
      if (max_change < options.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) throw ConvergenceError("fit_linear: coordinate descent did not converge");
    model.coefficients = w;
  }
  model.intercept = y_mean - x_mean.dot(model.coefficients);
  model.residual_variance = (y - model.predict(X)).squaredNorm() / static_cast<double>(X.rows());
  return model;
}

std::vector<double> default_c_grid() { return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

LinearSelection select_linear(const SchemeDataset& train_set, Penalty penalty, const std::vector<double>& c_grid,
                              double fit_fraction) {
  if (c_grid.empty()) throw std::invalid_argument("select_linear: empty C grid");
  const auto lag = build_lag_matrix(train_set);
  const Eigen::Index n = lag.X.rows();
  const auto n_fit = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * fit_fraction));
  if (n_fit < 1 || n_fit >= n) throw std::invalid_argument("select_linear: too few windows to split");

  LinearSelection sel;
  sel.c_grid = c_grid;
  sel.n_fit = static_cast<std::size_t>(n_fit);
  sel.n_validation = static_cast<std::size_t>(n - n_fit);
  const auto X_fit = lag.X.topRows(n_fit);
  const Eigen::VectorXd y_fit = lag.y.head(n_fit);
  const Eigen::MatrixXd X_val = lag.X.bottomRows(n - n_fit);
  const Eigen::VectorXd y_val = lag.y.tail(n - n_fit);

  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double C : c_grid) {
    double mape = std::numeric_limits<double>::quiet_NaN();
    try {
      auto model = fit_linear(X_fit, y_fit, penalty, C);
      model.columns = lag.columns;
      const Eigen::VectorXd pred = model.predict(X_val);
      mape = loss_mape(std::span(pred.data(), static_cast<std::size_t>(pred.size())),
                       std::span(y_val.data(), static_cast<std::size_t>(y_val.size())));
      if (mape < best) {
        best = mape;
        sel.model = std::move(model);
        any = true;
      }
    } catch (const std::domain_error&) {
    } catch (const ConvergenceError&) {
    }
    sel.validation_mape.push_back(mape);
  }
  if (!any) throw std::runtime_error("select_linear: every fit on the C grid failed");
  return sel;
}

std::string coefficients_csv(const LinearModel& m) {
  std::string out = "feature,lag,coef\n";
  for (std::size_t i = 0; i < m.columns.size(); ++i) {
    const auto& name = m.columns[i];
    const auto pos = name.rfind("_lag");
    out += name.substr(0, pos) + "," + name.substr(pos + 4) + "," +
           text::format_double(m.coefficients(static_cast<Eigen::Index>(i))) + "\n";
  }
  return out;
}

nlohmann::json to_json(const LinearModel& m) {
  return {{"kind", "linear"},
          {"penalty", m.penalty == Penalty::L1 ? "l1" : "l2"},
          {"C", m.C},
          {"intercept", m.intercept},
          {"columns", m.columns},
          {"coefficients", std::vector<double>(m.coefficients.data(), m.coefficients.data() + m.coefficients.size())},
          {"residual_variance", m.residual_variance},
          {"sweeps", m.sweeps}};
}

LinearModel linear_model_from_json(const nlohmann::json& j) {
  LinearModel m;
  m.penalty = j.at("penalty").get<std::string>() == "l1" ? Penalty::L1 : Penalty::L2;
  m.C = j.at("C").get<double>();
  m.intercept = j.at("intercept").get<double>();
  m.columns = j.at("columns").get<std::vector<std::string>>();
  const auto coefs = j.at("coefficients").get<std::vector<double>>();
  m.coefficients = Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
  m.residual_variance = j.at("residual_variance").get<double>();
  m.sweeps = j.at("sweeps").get<int>();
  if (m.columns.size() != coefs.size()) throw std::invalid_argument("linear model json: column count mismatch");
  return m;
}

}  // namespace trendvol
