// Copyright 2026 The irscreen Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fully-connected autoencoder with optional Bernoulli input masking, trained
// on squared error plus a smooth-L1 term by hand-written backpropagation and
// Adam. Rows are samples throughout: a batch is an (n x d) matrix.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "irscreen/error.hpp"
#include "irscreen/random.hpp"

namespace irscreen {

struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden;  // encoder hidden sizes; decoder mirrors them
  int latent_dim = 0;
  std::uint64_t seed = 0;   // Glorot-uniform weight init, zero biases

  /// d -> max(2d/3, z+1) -> z, with z clamped below d.
  static MlpSpec default_for(int input_dim, int latent_dim, std::uint64_t seed = 0) {
    require(input_dim >= 2, ErrorKind::InvalidArgument,
            "an autoencoder needs at least two input columns");
    MlpSpec s;
    s.input_dim = input_dim;
    s.latent_dim = std::clamp(latent_dim, 1, input_dim - 1);
    s.hidden = {std::max(2 * input_dim / 3, s.latent_dim + 1)};
    s.seed = seed;
    return s;
  }

  void validate() const {
    require(latent_dim >= 1 && latent_dim < input_dim, ErrorKind::InvalidArgument,
            "latent dimension must satisfy 1 <= z < d");
    for (int h : hidden) require(h >= 1, ErrorKind::InvalidArgument, "hidden sizes must be >= 1");
  }

  /// Layer widths from input to latent.
  std::vector<int> encoder_widths() const {
    std::vector<int> w{input_dim};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(latent_dim);
    return w;
  }
};

struct MaeTrainConfig {
  int epochs = 500;
  double lambda_sl = 0.01;
  double mask_prob = 0.75;  // 0 trains a plain autoencoder
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-12;
  double lr = 1e-3;
  double lr_decay_gamma = 0.95;
  int plateau_patience = 20;
  int warmup_epochs = 100;
  double plateau_tolerance = 1e-6;
  int batch_size = 0;  // 0: full batch up to 4096 rows, else 256
  std::uint64_t seed = 0;

  void validate() const {
    require(mask_prob >= 0.0 && mask_prob < 1.0, ErrorKind::InvalidArgument,
            "mask probability must be in [0, 1)");
    require(epochs >= 1, ErrorKind::InvalidArgument, "epochs must be >= 1");
    require(lr > 0.0 && lambda_sl >= 0.0, ErrorKind::InvalidArgument,
            "learning rate must be > 0 and smooth-L1 weight >= 0");
  }

  int effective_batch(Eigen::Index n) const {
    if (batch_size > 0) return batch_size;
    return n <= 4096 ? static_cast<int>(n) : 256;
  }
};

template <typename Scalar>
struct DenseLayer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weight;  // (out x in)
  Vector bias;    // (out)

  static DenseLayer zeros_like(const DenseLayer& o) {
    return {Matrix::Zero(o.weight.rows(), o.weight.cols()), Vector::Zero(o.bias.size())};
  }
};

template <typename Scalar>
struct Autoencoder {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  MlpSpec spec;
  std::vector<DenseLayer<Scalar>> layers;  // encoder layers, then decoder layers

  std::size_t encoder_depth() const { return spec.hidden.size() + 1; }

  /// ReLU on every layer except the latent and output layers.
  bool relu_after(std::size_t layer) const {
    return layer + 1 != encoder_depth() && layer + 1 != layers.size();
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }
};

template <typename Scalar>
using Gradients = std::vector<DenseLayer<Scalar>>;

template <typename Scalar>
Autoencoder<Scalar> make_autoencoder(const MlpSpec& spec) {
  spec.validate();
  Autoencoder<Scalar> ae;
  ae.spec = spec;
  auto widths = spec.encoder_widths();
  std::vector<int> dec(widths.rbegin(), widths.rend());
  widths.insert(widths.end(), dec.begin() + 1, dec.end());
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int in = widths[i], out = widths[i + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer<Scalar> l;
    l.weight.resize(out, in);
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) {
        l.weight(r, c) = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * limit);
      }
    }
    l.bias = DenseLayer<Scalar>::Vector::Zero(out);
    ae.layers.push_back(std::move(l));
  }
  return ae;
}

/// Keep-mask with each coordinate zeroed independently with probability p.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sample_mask(Eigen::Index rows,
                                                                  Eigen::Index cols, double p,
                                                                  std::mt19937_64& rng) {
  require(p >= 0.0 && p < 1.0, ErrorKind::InvalidArgument, "mask probability must be in [0, 1)");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform01(rng) < p ? Scalar(0) : Scalar(1);
  }
  return m;
}

/// Single-sample masking: returns (x * m, m).
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
mask_sample(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x, double p, std::mt19937_64& rng) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> m = sample_mask<Scalar>(x.size(), 1, p, rng);
  return {x.cwiseProduct(m), m};
}

template <typename Scalar>
Scalar smooth_l1(Scalar a, Scalar b) {
  const Scalar d = std::abs(a - b);
  return d < Scalar(1) ? Scalar(0.5) * d * d : d - Scalar(0.5);
}

template <typename Scalar>
struct ForwardPass {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Matrix> activations;  // activations[0] is the masked input
  Matrix reconstruction;
  Scalar loss = 0;
};

/// Loss = mean (x~ - x)^2 + lambda_sl * mean SL(x, x~), means over batch and
/// coordinates; the target is the unmasked x.
template <typename Scalar>
ForwardPass<Scalar> forward_loss(const Autoencoder<Scalar>& ae,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& mask,
                                 Scalar lambda_sl) {
  require(x.cols() == ae.spec.input_dim && mask.rows() == x.rows() && mask.cols() == x.cols(),
          ErrorKind::ColumnMismatch, "autoencoder input does not match its width");
  ForwardPass<Scalar> fp;
  fp.activations.push_back(x.cwiseProduct(mask));
  for (std::size_t l = 0; l < ae.layers.size(); ++l) {
    const auto& layer = ae.layers[l];
    typename ForwardPass<Scalar>::Matrix z = fp.activations.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (ae.relu_after(l)) z = z.cwiseMax(Scalar(0));
    fp.activations.push_back(std::move(z));
  }
  fp.reconstruction = fp.activations.back();
  const Scalar count = static_cast<Scalar>(x.size());
  const auto diff = (fp.reconstruction - x).array();
  const Scalar mse = diff.square().sum() / count;
  const Scalar sl = diff.abs()
                        .unaryExpr([](Scalar d) { return d < Scalar(1) ? Scalar(0.5) * d * d
                                                                          : d - Scalar(0.5); })
                        .sum() /
                    count;
  fp.loss = mse + lambda_sl * sl;
  return fp;
}

/// Exact gradients of forward_loss with respect to every weight and bias.
template <typename Scalar>
Gradients<Scalar> backward_gradients(const Autoencoder<Scalar>& ae, const ForwardPass<Scalar>& fp,
                                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                                     Scalar lambda_sl) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Scalar count = static_cast<Scalar>(x.size());
  const Matrix diff = fp.reconstruction - x;
  const Matrix sl_grad = diff.unaryExpr([](Scalar d) {
    return std::abs(d) < Scalar(1) ? d : (d > Scalar(0) ? Scalar(1) : Scalar(-1));
  });
  Matrix delta = (Scalar(2) * diff + lambda_sl * sl_grad) / count;

  Gradients<Scalar> grads(ae.layers.size());
  for (std::size_t l = ae.layers.size(); l-- > 0;) {
    if (ae.relu_after(l)) {
      delta = delta.cwiseProduct(
          fp.activations[l + 1].unaryExpr([](Scalar a) { return a > Scalar(0) ? Scalar(1) : Scalar(0); }));
    }
    grads[l].weight = delta.transpose() * fp.activations[l];
    grads[l].bias = delta.colwise().sum().transpose();
    if (l > 0) delta = delta * ae.layers[l].weight;
  }
  return grads;
}

template <typename Scalar>
Gradients<Scalar> backward_gradients(const Autoencoder<Scalar>& ae,
                                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& mask,
                                     Scalar lambda_sl) {
  return backward_gradients(ae, forward_loss(ae, x, mask, lambda_sl), x, lambda_sl);
}

/// One bias-corrected Adam update of `param` in place; t counts from 1.
template <typename P, typename G>
void adam_update(Eigen::DenseBase<P>& param, Eigen::DenseBase<P>& m, Eigen::DenseBase<P>& v,
                 const Eigen::DenseBase<G>& grad, double lr, double beta1, double beta2,
                 double eps, long t) {
  using Scalar = typename P::Scalar;
  const Scalar b1 = static_cast<Scalar>(beta1), b2 = static_cast<Scalar>(beta2);
  m.derived() = b1 * m.derived() + (Scalar(1) - b1) * grad.derived();
  v.derived() = b2 * v.derived() + (Scalar(1) - b2) * grad.derived().cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(t));
  const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(t));
  param.derived().array() -= static_cast<Scalar>(lr) * (m.derived().array() / c1) /
                             ((v.derived().array() / c2).sqrt() + static_cast<Scalar>(eps));
}

template <typename Scalar>
struct AdamState {
  Gradients<Scalar> m, v;
  long t = 0;

  explicit AdamState(const Autoencoder<Scalar>& ae) {
    for (const auto& l : ae.layers) {
      m.push_back(DenseLayer<Scalar>::zeros_like(l));
      v.push_back(DenseLayer<Scalar>::zeros_like(l));
    }
  }
};

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, Autoencoder<Scalar>& ae, const Gradients<Scalar>& g,
               const MaeTrainConfig& cfg, double lr) {
  ++state.t;
  for (std::size_t l = 0; l < ae.layers.size(); ++l) {
    adam_update(ae.layers[l].weight, state.m[l].weight, state.v[l].weight, g[l].weight, lr,
                cfg.beta1, cfg.beta2, cfg.epsilon, state.t);
    adam_update(ae.layers[l].bias, state.m[l].bias, state.v[l].bias, g[l].bias, lr, cfg.beta1,
                cfg.beta2, cfg.epsilon, state.t);
  }
}

/// No decay during warm-up; afterwards the rate is multiplied by gamma each
/// time the epoch loss fails to improve by the tolerance for `patience`
/// consecutive epochs.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(const MaeTrainConfig& cfg) : cfg_(cfg), lr_(cfg.lr) {}

  double lr() const { return lr_; }

  void on_epoch_end(int epoch, double loss) {
    if (loss < best_ - cfg_.plateau_tolerance) {
      best_ = loss;
      stale_ = 0;
      return;
    }
    if (epoch <= cfg_.warmup_epochs) return;
    if (++stale_ >= cfg_.plateau_patience) {
      lr_ *= cfg_.lr_decay_gamma;
      stale_ = 0;
    }
  }

 private:
  MaeTrainConfig cfg_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int stale_ = 0;
};

template <typename Scalar>
struct TrainedAutoencoder {
  Autoencoder<Scalar> model;
  std::vector<double> loss_history;  // epoch-mean training loss
  double final_lr = 0.0;
};

template <typename Scalar>
TrainedAutoencoder<Scalar> train_autoencoder(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x_train, const MlpSpec& spec,
    const MaeTrainConfig& cfg) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  cfg.validate();
  require(x_train.rows() > 0, ErrorKind::InvalidArgument, "autoencoder needs training rows");
  require(x_train.allFinite(), ErrorKind::NonFinite, "NaN or inf in autoencoder input");
  TrainedAutoencoder<Scalar> out{make_autoencoder<Scalar>(spec), {}, cfg.lr};
  auto& ae = out.model;
  require(x_train.cols() == spec.input_dim, ErrorKind::ColumnMismatch,
          "training matrix width differs from the autoencoder input");

  AdamState<Scalar> adam(ae);
  PlateauSchedule schedule(cfg);
  std::mt19937_64 rng(cfg.seed);
  const Eigen::Index n = x_train.rows();
  const Eigen::Index batch = std::min<Eigen::Index>(cfg.effective_batch(n), n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (batch < n) shuffle_in_place(order, rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      Matrix xb(len, x_train.cols());
      for (Eigen::Index r = 0; r < len; ++r) {
        xb.row(r) = x_train.row(order[static_cast<std::size_t>(start + r)]);
      }
      const Matrix mask = cfg.mask_prob > 0.0
                              ? sample_mask<Scalar>(len, xb.cols(), cfg.mask_prob, rng)
                              : Matrix::Ones(len, xb.cols());
      const auto fp = forward_loss(ae, xb, mask, static_cast<Scalar>(cfg.lambda_sl));
      if (!std::isfinite(static_cast<double>(fp.loss))) {
        fail(ErrorKind::NonFinite, "autoencoder loss became non-finite at epoch " +
                                       std::to_string(epoch) + " (lr " +
                                       std::to_string(schedule.lr()) + ")");
      }
      const auto grads = backward_gradients(ae, fp, xb, static_cast<Scalar>(cfg.lambda_sl));
      adam_step(adam, ae, grads, cfg, schedule.lr());
      epoch_loss += static_cast<double>(fp.loss) * static_cast<double>(len);
    }
    epoch_loss /= static_cast<double>(n);
    out.loss_history.push_back(epoch_loss);
    schedule.on_epoch_end(epoch, epoch_loss);
  }
  out.final_lr = schedule.lr();
  return out;
}

/// Latent codes of unmasked rows.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> encode(
    const Autoencoder<Scalar>& ae, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) {
  require(x.cols() == ae.spec.input_dim, ErrorKind::ColumnMismatch,
          "encode input width differs from the autoencoder input");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a = x;
  for (std::size_t l = 0; l < ae.encoder_depth(); ++l) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> z = a * ae.layers[l].weight.transpose();
    z.rowwise() += ae.layers[l].bias.transpose();
    if (ae.relu_after(l)) z = z.cwiseMax(Scalar(0));
    a = std::move(z);
  }
  return a;
}

/// Full reconstruction of unmasked rows.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> reconstruct(
    const Autoencoder<Scalar>& ae, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix ones = Matrix::Ones(x.rows(), x.cols());
  return forward_loss(ae, x, ones, Scalar(0)).reconstruction;
}

nlohmann::json to_json(const MaeTrainConfig& c);
MaeTrainConfig mae_config_from_json(const nlohmann::json& j, MaeTrainConfig defaults = {});
nlohmann::json to_json(const Autoencoder<double>& ae);
Autoencoder<double> autoencoder_from_json(const nlohmann::json& j);

}  // namespace irscreen
