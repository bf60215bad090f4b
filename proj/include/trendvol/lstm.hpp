#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "trendvol/scheme.hpp"

namespace trendvol {

/// Single LSTM block whose recurrent input is its own volatility prediction.
///
/// Every gate sees v = (sigma_hat, x). Gate weight matrices are
/// cell_dim x (1 + n_features); column 0 multiplies sigma_hat.
///
///   f  = sigmoid(W_f v + b_f)         forget
///   c  = sigmoid(W_c v + b_c)         input gate
///   g  = tanh(W_g v + b_g)            candidate
///   I' = f * I + c * g                cell update
///   o  = sigmoid(W_o v + b_o)         output gate
///   sigma_hat' = alpha + beta . (o * tanh(I'))
struct LstmParams {
  int n_features = 0;
  int cell_dim = 1;
  Eigen::MatrixXd forget_w, input_w, candidate_w, output_w;
  Eigen::VectorXd forget_b, input_b, candidate_b, output_b;
  double alpha = 0.0;
  Eigen::VectorXd beta;

  /// Zero-filled parameters of the given shape.
  static LstmParams zeros(int n_features, int cell_dim);

  Eigen::Index size() const noexcept;
  /// Flat view in a fixed order: the four weight matrices (column-major),
  /// the four biases, alpha, beta.
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::Ref<const Eigen::VectorXd>& flat);
  bool all_finite() const;
};

struct LstmState {
  Eigen::VectorXd cell;
  double sigma_hat = 0.0;
};

LstmParams init_params(int n_features, int cell_dim, double init_constant);

/// One recurrence step; the returned state carries I_i and sigma_hat_{i+1}.
LstmState forward_step(const LstmParams& params, const LstmState& state,
                       const Eigen::Ref<const Eigen::VectorXd>& x);

/// Runs the window from I = 0, sigma_hat = seed_sigma and returns the final
/// prediction. With `teacher_sigma`, step j > 0 consumes teacher_sigma(j - 1)
/// instead of the model's own previous output.
double forward_window(const LstmParams& params, const Eigen::Ref<const Eigen::MatrixXd>& window,
                      double seed_sigma, const Eigen::VectorXd* teacher_sigma = nullptr);

double forward_window(const LstmParams& params, const SampleWindow& window, bool teacher_forcing = false);

/// 100 * mean(|p - y| / y).
double loss_mape(std::span<const double> predictions, std::span<const double> targets);

struct WindowGradient {
  LstmParams grad;
  double prediction = 0.0;
  double loss = 0.0;  // |prediction - target| / target
};

/// Exact gradient of |sigma_hat - target| / target by reverse accumulation
/// through the unrolled window (cell carry and prediction feedback).
WindowGradient grad_window(const LstmParams& params, const Eigen::Ref<const Eigen::MatrixXd>& window,
                           double seed_sigma, double target, const Eigen::VectorXd* teacher_sigma = nullptr);

struct AdamState {
  Eigen::VectorXd m, v;
  std::int64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_size(Eigen::Index n, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                            double eps = 1e-8);
};

/// Bias-corrected Adam update of `params` in place.
void adam_step(AdamState& opt, Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad);
void adam_step(AdamState& opt, LstmParams& params, const LstmParams& grad);

enum class ValidationMode { Chronological, Random };
enum class InitMode { Constant, Normalized };

struct TrainConfig {
  int batch_size = 32;
  int epochs = 600;
  double validation_fraction = 0.2;
  bool shuffle = true;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  double init_constant = 0.05;
  int cell_dim = 1;
  bool teacher_forcing = false;
  ValidationMode validation_mode = ValidationMode::Chronological;
  InitMode init_mode = InitMode::Constant;
};

void validate(const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double train_mape = 0.0;
  double validation_mape = 0.0;
};

struct TrainResult {
  LstmParams params;  // parameters at the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  LstmParams final_params;  // parameters after the last epoch
};

TrainResult train(const SchemeDataset& train_set, const TrainConfig& config);

std::vector<double> predict(const LstmParams& params, const SchemeDataset& dataset, bool teacher_forcing = false);

std::string history_csv(const std::vector<EpochRecord>& history);

// -- serialization ----------------------------------------------------------

struct LstmModel {
  std::string name;
  LstmParams params;
  Scheme scheme;
  int lag_len = 10;
  std::vector<std::string> feature_order;
  NormalizationStats stats;
  double target_scale = 1.0;
  TrainConfig config;
  int best_epoch = 0;
};

nlohmann::json to_json(const LstmParams& params);
LstmParams lstm_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LstmModel& model);
LstmModel lstm_model_from_json(const nlohmann::json& j);

}  // namespace trendvol
