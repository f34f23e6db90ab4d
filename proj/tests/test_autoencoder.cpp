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


#include <doctest.h>

#include <random>

#include "irscreen/autoencoder.hpp"
#include "irscreen/error.hpp"
#include "oracles.hpp"

using namespace irscreen;
using Mat = Eigen::MatrixXd;

TEST_CASE("architecture") {
  const auto s = MlpSpec::default_for(12, 8);
  CHECK(s.encoder_widths() == std::vector<int>{12, 9, 8});
  const auto ae = make_autoencoder<double>(s);
  REQUIRE(ae.layers.size() == 4);
  CHECK(ae.layers[3].weight.rows() == 12);
  CHECK(ae.layers[2].weight.cols() == 8);
  CHECK(MlpSpec::default_for(5, 8).latent_dim == 4);
  CHECK_THROWS_AS(MlpSpec::default_for(1, 1), Error);
  MlpSpec bad = s;
  bad.latent_dim = 12;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("masking") {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, 1, 6);
  const auto [xh, m] = mask_sample<double>(x, 0.0, rng);
  CHECK(m.cwiseEqual(1.0).all());
  CHECK(xh == x);

  // surviving coordinates ~ Binomial(100, 0.25): mean 25, sd sqrt(100 * .25 * .75)
  const int draws = 10000;
  double total = 0.0;
  for (int i = 0; i < draws; ++i) total += sample_mask<double>(1, 100, 0.75, rng).sum();
  const double mean = total / draws;
  const double se = std::sqrt(100 * 0.25 * 0.75 / draws);
  CHECK(std::abs(mean - 25.0) < 3 * se);

  std::mt19937_64 a(42), b(42);
  CHECK(sample_mask<double>(5, 7, 0.5, a) == sample_mask<double>(5, 7, 0.5, b));
  CHECK_THROWS_AS(sample_mask<double>(1, 1, 1.0, a), Error);
}

TEST_CASE("loss terms") {
  MlpSpec s;
  s.input_dim = 2;
  s.latent_dim = 1;
  auto ae = make_autoencoder<double>(s);
  for (auto& l : ae.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  ae.layers.back().bias << 3.0, 4.0;
  const Mat x = Mat::Zero(1, 2), ones = Mat::Ones(1, 2);
  const double lambda = 0.3;
  const auto fp = forward_loss(ae, x, ones, lambda);
  CHECK(fp.reconstruction(0, 0) == 3.0);
  CHECK(fp.loss == doctest::Approx(12.5 + lambda * (2.5 + 3.5) / 2));

  ae.layers.back().bias.setZero();
  CHECK(forward_loss(ae, x, ones, lambda).loss == 0.0);
  for (const auto& g : backward_gradients(ae, x, ones, lambda)) {
    CHECK(g.weight.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.bias.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gradients match central differences") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z;
  MlpSpec s;
  s.input_dim = 5;
  s.hidden = {4};
  s.latent_dim = 2;
  s.seed = 3;
  auto ae = make_autoencoder<double>(s);
  for (auto& l : ae.layers) l.bias = l.bias.unaryExpr([&](double) { return 0.2 * z(rng); });
  Mat x(4, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(rng);
  const Mat mask = sample_mask<double>(4, 5, 0.4, rng);
  const auto a = backward_gradients(ae, x, mask, 0.5);
  const auto n = oracle::numeric_gradients(ae, x, mask, 0.5);
  for (std::size_t l = 0; l < a.size(); ++l) {
    CHECK((a[l].weight - n[l].weight).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a[l].bias - n[l].bias).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("adam") {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1), m = p, v = p;
  const Eigen::VectorXd g = Eigen::VectorXd::Ones(1);
  adam_update(p, m, v, g, 0.1, 0.9, 0.999, 1e-12, 1);
  CHECK(p(0) == doctest::Approx(-0.1));

  Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 2.0), mq = Eigen::VectorXd::Zero(3), vq = mq;
  adam_update(q, mq, vq, Eigen::VectorXd::Zero(3), 0.1, 0.9, 0.999, 1e-12, 1);
  CHECK(q.cwiseEqual(2.0).all());

  MaeTrainConfig cfg;
  cfg.lr = 0.05;
  cfg.plateau_patience = 2;
  cfg.warmup_epochs = 1;
  cfg.lr_decay_gamma = 0.5;
  PlateauSchedule sched(cfg);
  sched.on_epoch_end(1, 1.0);
  sched.on_epoch_end(2, 1.0);
  CHECK(sched.lr() == 0.05);
  sched.on_epoch_end(3, 1.0);
  CHECK(sched.lr() == 0.025);
}

TEST_CASE("plain autoencoder recovers a linear subspace") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  Mat basis(2, 10);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = z(rng) / std::sqrt(2.0);
  Mat codes(200, 2);
  for (Eigen::Index i = 0; i < codes.size(); ++i) codes.data()[i] = z(rng);
  const Mat x = codes * basis;

  MlpSpec s;
  s.input_dim = 10;
  s.latent_dim = 2;
  s.seed = 1;
  MaeTrainConfig cfg;
  cfg.mask_prob = 0.0;
  cfg.lambda_sl = 0.0;
  cfg.lr = 0.01;
  cfg.epochs = 3000;
  const auto trained = train_autoencoder(x, s, cfg);
  const double mse = (reconstruct(trained.model, x) - x).array().square().mean();
  CHECK(mse < 1e-3);
  CHECK(trained.loss_history.back() < trained.loss_history.front());

  const Mat twin = x.topRows(1).replicate(3, 1);
  const Mat e = encode(trained.model, twin);
  CHECK(e.row(0) == e.row(2));
  CHECK(e.cols() == 2);

  // same seed, same trajectory
  cfg.epochs = 50;
  cfg.mask_prob = 0.5;
  const auto r1 = train_autoencoder(x, s, cfg), r2 = train_autoencoder(x, s, cfg);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK(to_json(r1.model) == to_json(r2.model));
  CHECK(to_json(autoencoder_from_json(to_json(r1.model))) == to_json(r1.model));
}
