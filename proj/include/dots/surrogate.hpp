#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dots/dataset.hpp"
#include "dots/rng.hpp"

namespace dots {

enum class LossKind { squared_error, absolute_percentage_error };

struct RegressorConfig {
  /// Hidden layer widths; empty means two layers of max(64, 2*dims),
  /// resolved when training starts. Activation is a fixed rectifier.
  std::vector<int> hidden;
  double learning_rate = 1e-3;
  double weight_decay = 0.1;   // decoupled decay on weights, not biases
  int epochs = 300;
  int batch_size = 32;
  LossKind loss = LossKind::squared_error;
  std::uint64_t seed = 0;

  void validate() const {
    for (int w : hidden)
      if (w < 1) throw std::invalid_argument("RegressorConfig: hidden widths must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate < 1.0))
      throw std::invalid_argument("RegressorConfig: learning_rate must be in (0, 1)");
    if (weight_decay < 0.0)
      throw std::invalid_argument("RegressorConfig: weight_decay must be >= 0");
    if (epochs < 1) throw std::invalid_argument("RegressorConfig: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("RegressorConfig: batch_size must be >= 1");
  }

  std::string canonical() const {
    std::ostringstream os;
    os << "hidden=";
    for (int w : hidden) os << w << ",";
    os << ";lr=" << std::hexfloat << learning_rate << ";wd=" << weight_decay << ";epochs=" << epochs
       << ";batch=" << batch_size << ";loss=" << (loss == LossKind::squared_error ? "mse" : "mape")
       << ";seed=" << seed;
    return os.str();
  }

  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : canonical()) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// Fully-connected rectifier network with standardized inputs and labels.
/// Weights are immutable once train() returns; predictions are pure and
/// safe to run from any number of threads.
class Regressor {
 public:
  double predict_one(const Point& p) const {
    space_.check_dims(p.ix.size());
    Eigen::VectorXd a(space_.dims());
    const auto x = space_.realize(p);
    for (std::size_t d = 0; d < x.size(); ++d) a[d] = (x[d] - in_mean_[d]) / in_scale_[d];
    for (std::size_t k = 0; k < w_.size(); ++k) {
      a = (w_[k] * a + b_[k]).eval();
      if (k + 1 < w_.size()) a = a.cwiseMax(0.0);
    }
    return denormalize_label(a[0]);
  }

  /// Order-preserving; a batch is evaluated exactly like a loop of single
  /// predictions, so batching never changes values.
  std::vector<double> predict(const std::vector<Point>& xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& p : xs) out.push_back(predict_one(p));
    return out;
  }

  double normalize_label(double y) const { return (y - out_mean_) / out_scale_; }
  double denormalize_label(double z) const { return out_mean_ + out_scale_ * z; }

  const RegressorConfig& config() const { return cfg_; }
  const SearchSpace& space() const { return space_; }

  /// Fingerprint of the config this model was trained under; survives a
  /// save/load round trip so resumed runs can verify their artifacts.
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Full-training-set loss after each epoch, in training order.
  const std::vector<double>& loss_history() const { return loss_history_; }

  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("Regressor::save: cannot open " + path);
    f.precision(17);  // max_digits10: decimal text round-trips exactly
    f << "dots-regressor 1\n";
    f << "fingerprint " << std::hex << fingerprint_ << std::dec << "\n";
    f << "config " << cfg_.canonical() << "\n";
    f << "dims " << space_.dims() << "\n";
    f << "space";
    for (std::size_t d = 0; d < space_.dims(); ++d)
      f << " " << space_.lower(d) << " " << space_.upper(d) << " " << space_.step(d);
    f << "\n";
    f << "layers " << w_.size() << "\n";
    for (std::size_t k = 0; k < w_.size(); ++k) {
      f << "W " << w_[k].rows() << " " << w_[k].cols() << "\n";
      for (Eigen::Index r = 0; r < w_[k].rows(); ++r) {
        for (Eigen::Index c = 0; c < w_[k].cols(); ++c) f << (c ? " " : "") << w_[k](r, c);
        f << "\n";
      }
      f << "b " << b_[k].size() << "\n";
      for (Eigen::Index r = 0; r < b_[k].size(); ++r) f << (r ? " " : "") << b_[k][r];
      f << "\n";
    }
    auto dump_vec = [&f](const char* tag, const Eigen::VectorXd& v) {
      f << tag;
      for (Eigen::Index i = 0; i < v.size(); ++i) f << " " << v[i];
      f << "\n";
    };
    dump_vec("in_mean", in_mean_);
    dump_vec("in_scale", in_scale_);
    f << "out " << out_mean_ << " " << out_scale_ << "\n";
  }

  static Regressor load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("Regressor::load: cannot open " + path);
    std::string word;
    int version = 0;
    f >> word >> version;
    if (word != "dots-regressor" || version != 1)
      throw std::runtime_error("Regressor::load: not a dots-regressor v1 artifact");
    Regressor m;
    std::uint64_t stored_fp = 0;
    f >> word >> std::hex >> stored_fp >> std::dec;
    if (word != "fingerprint") throw std::runtime_error("Regressor::load: missing fingerprint");
    std::string cfg_line;
    f >> word;
    std::getline(f, cfg_line);
    if (word != "config") throw std::runtime_error("Regressor::load: missing config");
    m.cfg_text_ = cfg_line.empty() ? cfg_line : cfg_line.substr(1);
    std::size_t dims = 0;
    f >> word >> dims;
    if (word != "dims" || dims == 0) throw std::runtime_error("Regressor::load: bad dims");
    std::vector<double> lo(dims), hi(dims), st(dims);
    f >> word;
    if (word != "space") throw std::runtime_error("Regressor::load: missing space");
    for (std::size_t d = 0; d < dims; ++d) f >> lo[d] >> hi[d] >> st[d];
    m.space_ = SearchSpace(lo, hi, st);
    std::size_t layers = 0;
    f >> word >> layers;
    if (word != "layers") throw std::runtime_error("Regressor::load: missing layers");
    m.w_.resize(layers);
    m.b_.resize(layers);
    for (std::size_t k = 0; k < layers; ++k) {
      Eigen::Index rows, cols;
      f >> word >> rows >> cols;
      if (word != "W") throw std::runtime_error("Regressor::load: missing weight block");
      m.w_[k].resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) f >> m.w_[k](r, c);
      Eigen::Index bn;
      f >> word >> bn;
      if (word != "b" || bn != rows) throw std::runtime_error("Regressor::load: missing bias block");
      m.b_[k].resize(bn);
      for (Eigen::Index r = 0; r < bn; ++r) f >> m.b_[k][r];
    }
    auto read_vec = [&f, dims](const char* tag, Eigen::VectorXd& v) {
      std::string w;
      f >> w;
      if (w != tag) throw std::runtime_error("Regressor::load: missing " + std::string(tag));
      v.resize(static_cast<Eigen::Index>(dims));
      for (std::size_t i = 0; i < dims; ++i) f >> v[static_cast<Eigen::Index>(i)];
    };
    read_vec("in_mean", m.in_mean_);
    read_vec("in_scale", m.in_scale_);
    f >> word >> m.out_mean_ >> m.out_scale_;
    if (word != "out" || !f) throw std::runtime_error("Regressor::load: truncated artifact");
    m.fingerprint_ = stored_fp;
    return m;
  }

 private:
  Regressor() : space_(SearchSpace::uniform(1, 0.0, 1.0, 1.0)) {}
  explicit Regressor(SearchSpace space) : space_(std::move(space)) {}

  friend Regressor train(const Dataset&, const RegressorConfig&);

  SearchSpace space_;
  std::vector<Eigen::MatrixXd> w_;
  std::vector<Eigen::VectorXd> b_;
  Eigen::VectorXd in_mean_, in_scale_;
  double out_mean_ = 0.0, out_scale_ = 1.0;
  RegressorConfig cfg_;
  std::string cfg_text_;
  std::uint64_t fingerprint_ = 0;
  std::vector<double> loss_history_;
};

namespace detail {

inline double batch_loss(const Eigen::RowVectorXd& pred_std, const Eigen::RowVectorXd& y_std,
                         const Eigen::RowVectorXd& y_raw, double out_mean, double out_scale,
                         LossKind loss) {
  const auto m = static_cast<double>(pred_std.size());
  if (loss == LossKind::squared_error) return (pred_std - y_std).squaredNorm() / m;
  double s = 0.0;
  for (Eigen::Index i = 0; i < pred_std.size(); ++i) {
    const double raw = out_mean + out_scale * pred_std[i];
    s += std::abs(raw - y_raw[i]) / std::max(std::abs(y_raw[i]), 1e-9);
  }
  return s / m;
}

}  // namespace detail

/// Fit the network with Adam (moment decay 0.9/0.999, epsilon 1e-8) on the
/// configured loss. Inputs and labels are standardized from the training
/// data; training is single-threaded and deterministic under cfg.seed.
inline Regressor train(const Dataset& data, const RegressorConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (data.size() < 10) throw std::invalid_argument("train: need at least 10 points");
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!std::isfinite(data.label(i)))
      throw std::invalid_argument("train: non-finite label at index " + std::to_string(i));

  const auto& space = data.space();
  const auto dims = static_cast<Eigen::Index>(space.dims());
  const auto n = static_cast<Eigen::Index>(data.size());

  Regressor model(space);
  model.cfg_ = cfg;
  model.fingerprint_ = cfg.fingerprint();

  Eigen::MatrixXd X(dims, n);
  Eigen::RowVectorXd y_raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = space.realize(data.point(static_cast<std::size_t>(i)));
    for (Eigen::Index d = 0; d < dims; ++d) X(d, i) = x[static_cast<std::size_t>(d)];
    y_raw[i] = data.label(static_cast<std::size_t>(i));
  }

  model.in_mean_ = X.rowwise().mean();
  model.in_scale_.resize(dims);
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double var = (X.row(d).array() - model.in_mean_[d]).square().mean();
    const double sd = std::sqrt(var);
    model.in_scale_[d] = sd > 1e-12 ? sd : 1.0;
  }
  Eigen::MatrixXd Xs = (X.colwise() - model.in_mean_).array().colwise() / model.in_scale_.array();

  model.out_mean_ = y_raw.mean();
  const double y_sd = std::sqrt((y_raw.array() - model.out_mean_).square().mean());
  model.out_scale_ = y_sd > 1e-12 ? y_sd : 1.0;
  Eigen::RowVectorXd y_std = (y_raw.array() - model.out_mean_) / model.out_scale_;

  std::vector<int> widths;
  if (cfg.hidden.empty()) {
    const int w = std::max<int>(64, 2 * static_cast<int>(dims));
    widths = {w, w};
  } else {
    widths = cfg.hidden;
  }
  std::vector<Eigen::Index> sizes;
  sizes.push_back(dims);
  for (int w : widths) sizes.push_back(w);
  sizes.push_back(1);

  Rng rng(cfg.seed);
  const std::size_t layers = sizes.size() - 1;
  model.w_.resize(layers);
  model.b_.resize(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    const Eigen::Index fan_in = sizes[k], fan_out = sizes[k + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    model.w_[k].resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c) model.w_[k](r, c) = rng.uniform(-limit, limit);
    model.b_[k] = Eigen::VectorXd::Zero(fan_out);
  }
  // zero-init output layer: the initial prediction is the label mean, so a
  // constant-label dataset is already an exact fit
  model.w_.back().setZero();

  // Adam state
  std::vector<Eigen::MatrixXd> mw(layers), vw(layers);
  std::vector<Eigen::VectorXd> mb(layers), vb(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    mw[k] = Eigen::MatrixXd::Zero(model.w_[k].rows(), model.w_[k].cols());
    vw[k] = mw[k];
    mb[k] = Eigen::VectorXd::Zero(model.b_[k].size());
    vb[k] = mb[k];
  }
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long t = 0;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

  std::vector<Eigen::MatrixXd> acts(layers + 1), zs(layers);
  auto forward = [&](const Eigen::MatrixXd& batch) {
    acts[0] = batch;
    for (std::size_t k = 0; k < layers; ++k) {
      zs[k] = (model.w_[k] * acts[k]).colwise() + model.b_[k];
      acts[k + 1] = (k + 1 < layers) ? zs[k].cwiseMax(0.0) : zs[k];
    }
  };

  model.loss_history_.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // cosine decay to 1% of the base rate by the final epoch
    const double progress = cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 0.0;
    const double lr = cfg.learning_rate * (0.01 + 0.99 * 0.5 * (1.0 + std::cos(progress * std::numbers::pi)));
    rng.shuffle(idx);
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index m = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd xb(dims, m);
      Eigen::RowVectorXd yb_std(m), yb_raw(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index src = idx[static_cast<std::size_t>(start + i)];
        xb.col(i) = Xs.col(src);
        yb_std[i] = y_std[src];
        yb_raw[i] = y_raw[src];
      }
      forward(xb);

      // output-layer gradient, standardized space
      Eigen::MatrixXd delta(1, m);
      const auto md = static_cast<double>(m);
      if (cfg.loss == LossKind::squared_error) {
        delta = 2.0 * (acts[layers].row(0) - yb_std) / md;
      } else {
        for (Eigen::Index i = 0; i < m; ++i) {
          const double raw = model.out_mean_ + model.out_scale_ * acts[layers](0, i);
          const double denom = std::max(std::abs(yb_raw[i]), 1e-9);
          const double sgn = raw > yb_raw[i] ? 1.0 : (raw < yb_raw[i] ? -1.0 : 0.0);
          delta(0, i) = model.out_scale_ * sgn / (denom * md);
        }
      }

      ++t;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
      for (std::size_t k = layers; k-- > 0;) {
        const Eigen::MatrixXd gw = delta * acts[k].transpose();
        const Eigen::VectorXd gb = delta.rowwise().sum();
        if (k > 0) {
          Eigen::MatrixXd back = model.w_[k].transpose() * delta;
          delta = back.cwiseProduct((zs[k - 1].array() > 0.0).cast<double>().matrix());
        }
        mw[k] = beta1 * mw[k] + (1.0 - beta1) * gw;
        vw[k] = beta2 * vw[k] + (1.0 - beta2) * gw.cwiseProduct(gw);
        mb[k] = beta1 * mb[k] + (1.0 - beta1) * gb;
        vb[k] = beta2 * vb[k] + (1.0 - beta2) * gb.cwiseProduct(gb);
        model.w_[k] -= (lr * ((mw[k] / bc1).array() /
                                             ((vw[k] / bc2).array().sqrt() + adam_eps) +
                                             cfg.weight_decay * model.w_[k].array()))
                           .matrix();
        model.b_[k] -= (lr * (mb[k] / bc1).array() /
                        ((vb[k] / bc2).array().sqrt() + adam_eps))
                           .matrix();
      }
    }
    forward(Xs);
    model.loss_history_.push_back(detail::batch_loss(acts[layers].row(0), y_std, y_raw,
                                                     model.out_mean_, model.out_scale_, cfg.loss));
  }
  return model;
}

/// Coefficient of determination over a holdout set: 1 - SS_res/SS_tot.
inline double r_squared(const std::vector<double>& predictions,
                        const std::vector<double>& labels) {
  if (labels.size() < 2 || predictions.size() != labels.size())
    throw std::invalid_argument("r_squared: need >= 2 labels and matching predictions");
  double mean = 0.0;
  for (double y : labels) mean += y;
  mean /= static_cast<double>(labels.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ss_tot += (labels[i] - mean) * (labels[i] - mean);
    ss_res += (labels[i] - predictions[i]) * (labels[i] - predictions[i]);
  }
  if (ss_tot == 0.0) throw std::invalid_argument("r_squared: zero label variance");
  return 1.0 - ss_res / ss_tot;
}

inline double r_squared(const Regressor& model, const Dataset& holdout) {
  return r_squared(model.predict(holdout.points()), holdout.labels());
}

}  // namespace dots
