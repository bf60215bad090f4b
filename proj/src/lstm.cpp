#include "trendvol/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "trendvol/error.hpp"
#include "trendvol/text.hpp"

namespace trendvol {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

Eigen::VectorXd tanh_vec(const Eigen::VectorXd& a) { return a.array().tanh().matrix(); }

void check_shape(const LstmParams& p, Eigen::Index n_features) {
  if (n_features != p.n_features)
    throw std::invalid_argument("lstm: input has " + std::to_string(n_features) + " features, params expect " +
                                std::to_string(p.n_features));
}

Eigen::VectorXd concat(double sigma_hat, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd v(x.size() + 1);
  v << sigma_hat, x;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// parameters

LstmParams LstmParams::zeros(int n_features, int cell_dim) {
  if (n_features < 1) throw std::invalid_argument("lstm: n_features must be >= 1");
  if (cell_dim < 1) throw std::invalid_argument("lstm: cell_dim must be >= 1");
  LstmParams p;
  p.n_features = n_features;
  p.cell_dim = cell_dim;
  for (auto* w : {&p.forget_w, &p.input_w, &p.candidate_w, &p.output_w}) *w = Eigen::MatrixXd::Zero(cell_dim, n_features + 1);
  for (auto* b : {&p.forget_b, &p.input_b, &p.candidate_b, &p.output_b}) *b = Eigen::VectorXd::Zero(cell_dim);
  p.beta = Eigen::VectorXd::Zero(cell_dim);
  return p;
}

Eigen::Index LstmParams::size() const noexcept {
  return 4 * forget_w.size() + 4 * forget_b.size() + 1 + beta.size();
}

Eigen::VectorXd LstmParams::pack() const {
  Eigen::VectorXd flat(size());
  Eigen::Index at = 0;
  for (const auto* w : {&forget_w, &input_w, &candidate_w, &output_w}) {
    flat.segment(at, w->size()) = w->reshaped();
    at += w->size();
  }
  for (const auto* b : {&forget_b, &input_b, &candidate_b, &output_b}) {
    flat.segment(at, b->size()) = *b;
    at += b->size();
  }
  flat(at++) = alpha;
  flat.segment(at, beta.size()) = beta;
  return flat;
}

void LstmParams::unpack(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() != size()) throw std::invalid_argument("LstmParams::unpack: size mismatch");
  Eigen::Index at = 0;
  for (auto* w : {&forget_w, &input_w, &candidate_w, &output_w}) {
    w->reshaped() = flat.segment(at, w->size());
    at += w->size();
  }
  for (auto* b : {&forget_b, &input_b, &candidate_b, &output_b}) {
    *b = flat.segment(at, b->size());
    at += b->size();
  }
  alpha = flat(at++);
  beta = flat.segment(at, beta.size());
}

bool LstmParams::all_finite() const { return pack().allFinite(); }

LstmParams init_params(int n_features, int cell_dim, double init_constant) {
  if (!(init_constant > 0.0)) throw std::invalid_argument("init_params: init_constant must be > 0");
  LstmParams p = LstmParams::zeros(n_features, cell_dim);
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(p.size(), init_constant);
  p.unpack(flat);
  return p;
}

// ---------------------------------------------------------------------------
// forward

LstmState forward_step(const LstmParams& p, const LstmState& state, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_shape(p, x.size());
  if (!x.allFinite() || !std::isfinite(state.sigma_hat)) throw std::domain_error("forward_step: non-finite input");
  const Eigen::VectorXd v = concat(state.sigma_hat, x);
  const Eigen::VectorXd f = sigmoid(p.forget_w * v + p.forget_b);
  const Eigen::VectorXd c = sigmoid(p.input_w * v + p.input_b);
  const Eigen::VectorXd g = tanh_vec(p.candidate_w * v + p.candidate_b);
  const Eigen::VectorXd o = sigmoid(p.output_w * v + p.output_b);
  LstmState next;
  next.cell = f.cwiseProduct(state.cell) + c.cwiseProduct(g);
  next.sigma_hat = p.alpha + p.beta.dot(o.cwiseProduct(tanh_vec(next.cell)));
  return next;
}

double forward_window(const LstmParams& p, const Eigen::Ref<const Eigen::MatrixXd>& window, double seed_sigma,
                      const Eigen::VectorXd* teacher_sigma) {
  if (window.rows() == 0) throw std::invalid_argument("forward_window: empty window");
  if (teacher_sigma && teacher_sigma->size() < window.rows())
    throw std::invalid_argument("forward_window: teacher sigma shorter than window");
  LstmState state{Eigen::VectorXd::Zero(p.cell_dim), seed_sigma};
  for (Eigen::Index j = 0; j < window.rows(); ++j) {
    if (teacher_sigma && j > 0) state.sigma_hat = (*teacher_sigma)(j - 1);
    state = forward_step(p, state, window.row(j).transpose());
  }
  return state.sigma_hat;
}

double forward_window(const LstmParams& params, const SampleWindow& w, bool teacher_forcing) {
  return forward_window(params, w.inputs, w.seed_sigma, teacher_forcing ? &w.raw_sigma : nullptr);
}

double loss_mape(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("loss_mape: length mismatch");
  if (targets.empty()) throw std::invalid_argument("loss_mape: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0)) throw std::domain_error("loss_mape: nonpositive target");
    acc += std::abs(predictions[i] - targets[i]) / targets[i];
  }
  return 100.0 * acc / static_cast<double>(targets.size());
}

// ---------------------------------------------------------------------------
// backpropagation through time

WindowGradient grad_window(const LstmParams& p, const Eigen::Ref<const Eigen::MatrixXd>& window, double seed_sigma,
                           double target, const Eigen::VectorXd* teacher_sigma) {
  if (!(target > 0.0)) throw std::domain_error("grad_window: target must be > 0");
  if (window.rows() == 0) throw std::invalid_argument("grad_window: empty window");
  check_shape(p, window.cols());
  const Eigen::Index L = window.rows();
  const int H = p.cell_dim;

  struct Step {
    Eigen::VectorXd v, f, c, g, o, cell_prev, tanh_cell;
  };
  std::vector<Step> steps(static_cast<std::size_t>(L));
  Eigen::VectorXd cell = Eigen::VectorXd::Zero(H);
  double sigma_hat = seed_sigma;
  for (Eigen::Index j = 0; j < L; ++j) {
    if (teacher_sigma && j > 0) sigma_hat = (*teacher_sigma)(j - 1);
    auto& s = steps[static_cast<std::size_t>(j)];
    s.v = concat(sigma_hat, window.row(j).transpose());
    s.f = sigmoid(p.forget_w * s.v + p.forget_b);
    s.c = sigmoid(p.input_w * s.v + p.input_b);
    s.g = tanh_vec(p.candidate_w * s.v + p.candidate_b);
    s.o = sigmoid(p.output_w * s.v + p.output_b);
    s.cell_prev = cell;
    cell = s.f.cwiseProduct(cell) + s.c.cwiseProduct(s.g);
    s.tanh_cell = tanh_vec(cell);
    sigma_hat = p.alpha + p.beta.dot(s.o.cwiseProduct(s.tanh_cell));
  }

  WindowGradient out;
  out.prediction = sigma_hat;
  out.loss = std::abs(sigma_hat - target) / target;
  if (!std::isfinite(out.loss)) throw std::domain_error("grad_window: non-finite forward pass");
  out.grad = LstmParams::zeros(p.n_features, H);
  auto& gr = out.grad;

  const double diff = sigma_hat - target;
  double d_out = diff > 0.0 ? 1.0 / target : (diff < 0.0 ? -1.0 / target : 0.0);
  Eigen::VectorXd d_cell_carry = Eigen::VectorXd::Zero(H);
  for (Eigen::Index j = L; j-- > 0;) {
    const auto& s = steps[static_cast<std::size_t>(j)];
    const Eigen::VectorXd h = s.o.cwiseProduct(s.tanh_cell);
    gr.alpha += d_out;
    gr.beta += d_out * h;
    const Eigen::VectorXd dh = d_out * p.beta;
    const Eigen::VectorXd d_o = dh.cwiseProduct(s.tanh_cell);
    const Eigen::VectorXd d_cell =
        dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_cell.array().square()).matrix()) + d_cell_carry;
    const Eigen::VectorXd da_f = d_cell.cwiseProduct(s.cell_prev).cwiseProduct((s.f.array() * (1.0 - s.f.array())).matrix());
    const Eigen::VectorXd da_c = d_cell.cwiseProduct(s.g).cwiseProduct((s.c.array() * (1.0 - s.c.array())).matrix());
    const Eigen::VectorXd da_g = d_cell.cwiseProduct(s.c).cwiseProduct((1.0 - s.g.array().square()).matrix());
    const Eigen::VectorXd da_o = d_o.cwiseProduct((s.o.array() * (1.0 - s.o.array())).matrix());
    d_cell_carry = d_cell.cwiseProduct(s.f);

    gr.forget_w.noalias() += da_f * s.v.transpose();
    gr.input_w.noalias() += da_c * s.v.transpose();
    gr.candidate_w.noalias() += da_g * s.v.transpose();
    gr.output_w.noalias() += da_o * s.v.transpose();
    gr.forget_b += da_f;
    gr.input_b += da_c;
    gr.candidate_b += da_g;
    gr.output_b += da_o;

    // The previous step's prediction entered this step as v(0).
    const double d_sigma_in = p.forget_w.col(0).dot(da_f) + p.input_w.col(0).dot(da_c) +
                              p.candidate_w.col(0).dot(da_g) + p.output_w.col(0).dot(da_o);
    d_out = teacher_sigma ? 0.0 : d_sigma_in;
  }
  if (!gr.all_finite()) throw std::domain_error("grad_window: non-finite gradient");
  return out;
}

// ---------------------------------------------------------------------------
// Adam

AdamState AdamState::for_size(Eigen::Index n, double lr, double beta1, double beta2, double eps) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

void adam_step(AdamState& opt, Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (params.size() != grad.size() || opt.m.size() != grad.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grad.allFinite()) throw std::domain_error("adam_step: non-finite gradient");
  ++opt.t;
  opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grad;
  opt.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.t));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.t));
  params.array() -= opt.lr * (opt.m.array() / c1) / ((opt.v.array() / c2).sqrt() + opt.eps);
}

void adam_step(AdamState& opt, LstmParams& params, const LstmParams& grad) {
  Eigen::VectorXd flat = params.pack();
  adam_step(opt, flat, grad.pack());
  params.unpack(flat);
}

// ---------------------------------------------------------------------------
// training

void validate(const TrainConfig& c) {
  if (c.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (c.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0))
    throw std::invalid_argument("train: validation_fraction must lie in (0, 1)");
  if (!(c.lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (!(c.init_constant > 0.0)) throw std::invalid_argument("train: init_constant must be > 0");
  if (c.cell_dim < 1) throw std::invalid_argument("train: cell_dim must be >= 1");
}

namespace {

double mape_over(const LstmParams& p, const SchemeDataset& ds, const std::vector<std::size_t>& idx, bool teacher) {
  double acc = 0.0;
  for (auto i : idx) {
    const auto& w = ds.windows[i];
    acc += std::abs(forward_window(p, w, teacher) - w.target) / w.target;
  }
  return 100.0 * acc / static_cast<double>(idx.size());
}

}  // namespace

TrainResult train(const SchemeDataset& ds, const TrainConfig& cfg) {
  validate(cfg);
  const std::size_t n = ds.windows.size();
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * cfg.validation_fraction)));
  if (n < n_val + 2) throw std::invalid_argument("train: need at least 2 training windows after the validation split");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (cfg.validation_mode == ValidationMode::Random) std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
  if (cfg.validation_mode == ValidationMode::Random) {
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
  }

  LstmParams params = init_params(static_cast<int>(ds.n_features()), cfg.cell_dim, cfg.init_constant);
  if (cfg.init_mode == InitMode::Normalized) {
    const double bound = std::sqrt(6.0 / static_cast<double>(params.n_features + 1 + cfg.cell_dim));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto* w : {&params.forget_w, &params.input_w, &params.candidate_w, &params.output_w})
      for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = u(rng);
  }
  double mean_target = 0.0;
  for (auto i : train_idx) mean_target += ds.windows[i].target;
  params.alpha = mean_target / static_cast<double>(train_idx.size());

  AdamState opt = AdamState::for_size(params.size(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  TrainResult result;
  result.params = params;
  double best_val = std::numeric_limits<double>::infinity();
  int last_finite = -1;
  std::vector<std::size_t> epoch_order = train_idx;
  Eigen::VectorXd acc(params.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(epoch_order.begin(), epoch_order.end(), rng);
    for (std::size_t start = 0; start < epoch_order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(epoch_order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      acc.setZero();
      try {
        for (std::size_t b = start; b < stop; ++b) {
          const auto& w = ds.windows[epoch_order[b]];
          acc += grad_window(params, w.inputs, w.seed_sigma, w.target, cfg.teacher_forcing ? &w.raw_sigma : nullptr)
                     .grad.pack();
        }
        acc /= static_cast<double>(stop - start);
        Eigen::VectorXd flat = params.pack();
        adam_step(opt, flat, acc);
        params.unpack(flat);
      } catch (const std::domain_error& e) {
        throw TrainingDivergence(std::string("training diverged: ") + e.what(), last_finite);
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      rec.train_mape = mape_over(params, ds, train_idx, cfg.teacher_forcing);
      rec.validation_mape = mape_over(params, ds, val_idx, cfg.teacher_forcing);
    } catch (const std::domain_error& e) {
      throw TrainingDivergence(std::string("training diverged: ") + e.what(), last_finite);
    }
    if (!std::isfinite(rec.train_mape) || !std::isfinite(rec.validation_mape))
      throw TrainingDivergence("training diverged: non-finite MAPE", last_finite);
    last_finite = epoch;
    result.history.push_back(rec);
    if (rec.validation_mape < best_val) {
      best_val = rec.validation_mape;
      result.params = params;
      result.best_epoch = epoch;
    }
  }
  result.final_params = params;
  return result;
}

std::vector<double> predict(const LstmParams& params, const SchemeDataset& ds, bool teacher_forcing) {
  if (ds.windows.empty()) throw std::invalid_argument("predict: empty dataset");
  std::vector<double> out;
  out.reserve(ds.windows.size());
  for (const auto& w : ds.windows) out.push_back(forward_window(params, w, teacher_forcing));
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_mape,validation_mape\n";
  for (const auto& r : history)
    out += std::to_string(r.epoch) + "," + text::format_double(r.train_mape) + "," +
           text::format_double(r.validation_mape) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw std::invalid_argument("lstm json: bad matrix shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("lstm json: bad matrix shape");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json to_json(const LstmParams& p) {
  nlohmann::json j;
  j["n_features"] = p.n_features;
  j["cell_dim"] = p.cell_dim;
  j["weight_shape"] = {p.cell_dim, p.n_features + 1};
  j["forget_weights"] = matrix_json(p.forget_w);
  j["input_gate_weights"] = matrix_json(p.input_w);
  j["candidate_weights"] = matrix_json(p.candidate_w);
  j["output_gate_weights"] = matrix_json(p.output_w);
  j["forget_bias"] = vector_json(p.forget_b);
  j["input_gate_bias"] = vector_json(p.input_b);
  j["candidate_bias"] = vector_json(p.candidate_b);
  j["output_gate_bias"] = vector_json(p.output_b);
  j["output_intercept"] = p.alpha;
  j["output_weights"] = vector_json(p.beta);
  return j;
}

LstmParams lstm_params_from_json(const nlohmann::json& j) {
  LstmParams p = LstmParams::zeros(j.at("n_features").get<int>(), j.at("cell_dim").get<int>());
  const Eigen::Index rows = p.cell_dim, cols = p.n_features + 1;
  p.forget_w = matrix_from(j.at("forget_weights"), rows, cols);
  p.input_w = matrix_from(j.at("input_gate_weights"), rows, cols);
  p.candidate_w = matrix_from(j.at("candidate_weights"), rows, cols);
  p.output_w = matrix_from(j.at("output_gate_weights"), rows, cols);
  p.forget_b = vector_from(j.at("forget_bias"));
  p.input_b = vector_from(j.at("input_gate_bias"));
  p.candidate_b = vector_from(j.at("candidate_bias"));
  p.output_b = vector_from(j.at("output_gate_bias"));
  p.alpha = j.at("output_intercept").get<double>();
  p.beta = vector_from(j.at("output_weights"));
  for (const auto* b : {&p.forget_b, &p.input_b, &p.candidate_b, &p.output_b, &p.beta})
    if (b->size() != rows) throw std::invalid_argument("lstm json: bad vector shape");
  return p;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"validation_fraction", c.validation_fraction},
          {"shuffle", c.shuffle},
          {"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"seed", c.seed},
          {"init_constant", c.init_constant},
          {"cell_dim", c.cell_dim},
          {"teacher_forcing", c.teacher_forcing},
          {"validation_mode", c.validation_mode == ValidationMode::Chronological ? "chronological" : "random"},
          {"init_mode", c.init_mode == InitMode::Constant ? "constant" : "normalized"}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.shuffle = j.at("shuffle").get<bool>();
  c.lr = j.at("lr").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.init_constant = j.at("init_constant").get<double>();
  c.cell_dim = j.at("cell_dim").get<int>();
  c.teacher_forcing = j.at("teacher_forcing").get<bool>();
  c.validation_mode = j.at("validation_mode").get<std::string>() == "random" ? ValidationMode::Random
                                                                              : ValidationMode::Chronological;
  c.init_mode = j.at("init_mode").get<std::string>() == "normalized" ? InitMode::Normalized : InitMode::Constant;
  return c;
}

nlohmann::json to_json(const LstmModel& m) {
  nlohmann::json j;
  j["model"] = m.name;
  j["kind"] = "lstm";
  j["params"] = to_json(m.params);
  j["scheme"] = {{"dt", m.scheme.dt}, {"k", format_k(m.scheme.k)}};
  j["lag_len"] = m.lag_len;
  j["feature_order"] = m.feature_order;
  j["normalization"] = {{"k", format_k(m.stats.k)}, {"mean", vector_json(m.stats.mean)}, {"std", vector_json(m.stats.std)}};
  j["target_scale"] = m.target_scale;
  j["train_config"] = to_json(m.config);
  j["best_epoch"] = m.best_epoch;
  return j;
}

LstmModel lstm_model_from_json(const nlohmann::json& j) {
  LstmModel m;
  m.name = j.at("model").get<std::string>();
  m.params = lstm_params_from_json(j.at("params"));
  m.scheme.dt = j.at("scheme").at("dt").get<int>();
  m.scheme.k = parse_k(j.at("scheme").at("k").get<std::string>());
  m.lag_len = j.at("lag_len").get<int>();
  m.feature_order = j.at("feature_order").get<std::vector<std::string>>();
  m.stats.k = parse_k(j.at("normalization").at("k").get<std::string>());
  m.stats.mean = vector_from(j.at("normalization").at("mean"));
  m.stats.std = vector_from(j.at("normalization").at("std"));
  m.target_scale = j.at("target_scale").get<double>();
  m.config = train_config_from_json(j.at("train_config"));
  m.best_epoch = j.at("best_epoch").get<int>();
  return m;
}

}  // namespace trendvol
