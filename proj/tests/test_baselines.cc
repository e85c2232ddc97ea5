// Copyright 2026 The urnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "block_oracles.h"
#include "urnet/baselines.h"

namespace urnet {
namespace {

TEST(RegressionGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto dims = testing::random_dims(rng, 5);
    const NetworkParams net = testing::random_net(dims, rng);
    const TrainingData data = testing::random_data(dims, 6, rng);
    const double c1 = 0.05;
    const ParamGradient g = regression_gradient(net, data.inputs, data.targets, c1);
    const double h = 1e-6;
    for (int l = 1; l <= net.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < net.W(l).size(); ++i) {
        NetworkParams p = net, m = net;
        p.W(l).data()[i] += h;
        m.W(l).data()[i] -= h;
        const double fd =
            (regression_objective(p, data, c1) - regression_objective(m, data, c1)) / (2 * h);
        EXPECT_NEAR(g.W[l - 1].data()[i], fd, 1e-5 * (1 + std::abs(fd)));
      }
      for (Eigen::Index i = 0; i < net.b(l).size(); ++i) {
        NetworkParams p = net, m = net;
        p.b(l)(i) += h;
        m.b(l)(i) -= h;
        const double fd =
            (regression_objective(p, data, c1) - regression_objective(m, data, c1)) / (2 * h);
        EXPECT_NEAR(g.b[l - 1](i), fd, 1e-5 * (1 + std::abs(fd)));
      }
    }
  }
}

TEST(RegressionGradient, DataWeightScalesOnlyTheDataTerm) {
  std::mt19937_64 rng(4);
  const std::vector<int> dims = {3, 4, 2};
  const NetworkParams net = testing::random_net(dims, rng);
  const TrainingData data = testing::random_data(dims, 5, rng);
  const ParamGradient g1 = regression_gradient(net, data.inputs, data.targets, 0.0);
  const ParamGradient g3 = regression_gradient(net, data.inputs, data.targets, 0.0, 3.0);
  const ParamGradient r = regression_gradient(net, data.inputs, data.targets, 0.5, 3.0);
  for (int l = 0; l < 2; ++l) {
    EXPECT_LE((g3.W[l] - 3.0 * g1.W[l]).norm(), 1e-12 * g3.W[l].norm());
    EXPECT_LE((r.W[l] - g3.W[l] - 0.5 * net.weights[l]).norm(), 1e-12 * (1 + r.W[l].norm()));
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::mt19937_64 rng(5);
  const std::vector<int> dims = {3, 4, 2};
  const NetworkParams net = testing::random_net(dims, rng);
  const Matrix X = testing::gaussian_matrix(3, 7, rng);
  AdamConfig cfg;
  cfg.c1 = 0.0;
  cfg.epochs = 20;
  const TrainResult r = adam_train(net, {X, forward(net, X)}, cfg);
  for (int l = 1; l <= 2; ++l) {
    EXPECT_EQ(r.net.W(l), net.W(l));
    EXPECT_EQ(r.net.b(l), net.b(l));
  }
}

TEST(Adam, ScalarQuadraticReachesMinimizer) {
  // The hidden unit is dead (b_1 = -1), so the objective reduces to
  // 1/2 (2 - b)^2 + 1/2 w^2 in the output weight w and bias b.
  NetworkParams net = zero_network({1, 1, 1});
  net.b(1)(0) = -1.0;
  net.W(2)(0, 0) = 1.0;
  const TrainingData data{Matrix::Ones(1, 1), Matrix::Constant(1, 1, 2.0)};
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.c1 = 1.0;
  cfg.epochs = 1000;
  const TrainResult r = adam_train(net, data, cfg);
  EXPECT_NEAR(r.net.W(2)(0, 0), 0.0, 1e-3);
  EXPECT_NEAR(r.net.b(2)(0), 2.0, 1e-3);
}

TEST(Adam, FirstStepHasMagnitudeLearningRate) {
  std::mt19937_64 rng(6);
  const std::vector<int> dims = {3, 4, 2};
  const NetworkParams net = testing::random_net(dims, rng);
  const TrainingData data = testing::random_data(dims, 5, rng);
  AdamConfig cfg;
  cfg.epochs = 1;
  const ParamGradient g = regression_gradient(net, data.inputs, data.targets, cfg.c1);
  const TrainResult r = adam_train(net, data, cfg);
  for (int l = 1; l <= 2; ++l) {
    for (Eigen::Index i = 0; i < net.W(l).size(); ++i) {
      const double gi = g.W[l - 1].data()[i];
      if (std::abs(gi) < 1e-3) continue;
      const double step = r.net.W(l).data()[i] - net.W(l).data()[i];
      EXPECT_NEAR(step, -cfg.learning_rate * gi / (std::abs(gi) + cfg.epsilon), 1e-15);
      EXPECT_NEAR(std::abs(step), cfg.learning_rate, 1e-8);
    }
  }
}

TEST(Adam, HugeStepDiverges) {
  std::mt19937_64 rng(7);
  const std::vector<int> dims = {3, 4, 2};
  const NetworkParams net = testing::random_net(dims, rng);
  const TrainingData data = testing::random_data(dims, 5, rng);
  AdamConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.epochs = 5;
  EXPECT_THROW(adam_train(net, data, cfg), DivergenceError);
}

TEST(Adam, MinibatchRunIsReproducible) {
  std::mt19937_64 rng(8);
  const std::vector<int> dims = {3, 5, 2};
  const NetworkParams net = testing::random_net(dims, rng);
  const TrainingData data = testing::random_data(dims, 13, rng);
  AdamConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.shuffle_seed = 11;
  EXPECT_EQ(adam_train(net, data, cfg).objective, adam_train(net, data, cfg).objective);
}

TEST(Adam, RejectsBadConfig) {
  AdamConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.beta2 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Bcd, ScalarUMatchesGridSearch) {
  auto f = [](double v, double m, double u) {
    const double r = v - std::max(u, 0.0);
    return r * r + (u - m) * (u - m);
  };
  EXPECT_EQ(bcd_u_scalar(1.0, -1.0), -1.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pick(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double v = pick(rng), m = pick(rng);
    const double u = bcd_u_scalar(v, m);
    const double best = testing::grid_min([&](double z) { return f(v, m, z); }, -8.0, 8.0, 20001);
    EXPECT_LE(f(v, m, u), best + 1e-12);
  }
}

TEST(Bcd, EveryBlockUpdateIsNonIncreasing) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto dims = testing::random_dims(rng, 6);
    NetworkParams net = testing::random_net(dims, rng);
    const TrainingData data = testing::random_data(dims, 8, rng);
    BcdConfig cfg;
    BcdState st = bcd_init_state(net, data.inputs);
    double prev = bcd_objective(net, st, data, cfg);
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 20; ++s) {
      bcd_sweep(net, st, data, cfg, [&](const BcdBlockEvent& e) {
        worst = std::max(worst, e.objective - prev);
        prev = e.objective;
      });
    }
    EXPECT_LE(worst, 1e-10) << "trial " << trial;
  }
}

TEST(Bcd, FeasibleExactFitIsFixedPointForStiffPenalty) {
  std::mt19937_64 rng(11);
  const std::vector<int> dims = {3, 4, 2};
  const NetworkParams net = testing::random_net(dims, rng);
  const Matrix X = testing::gaussian_matrix(3, 20, rng);
  const TrainingData data{X, forward(net, X)};
  BcdConfig cfg;
  cfg.gamma = 1e8;
  cfg.c1 = 0.0;
  NetworkParams out = net;
  BcdState st = bcd_init_state(net, X);
  const BcdState st0 = st;
  bcd_sweep(out, st, data, cfg);
  for (int l = 1; l <= 2; ++l) {
    EXPECT_LE((out.W(l) - net.W(l)).norm(), 1e-8);
    EXPECT_LE((out.b(l) - net.b(l)).norm(), 1e-8);
  }
  EXPECT_LE((st.U[0] - st0.U[0]).norm(), 1e-8);
  EXPECT_LE((st.V[0] - st0.V[0]).norm(), 1e-8);
}

TEST(Bcd, RejectsNonPositiveGamma) {
  BcdConfig cfg;
  cfg.gamma = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// Both trainers on generic tiny problems: strict decrease over the first ten
// epochs of their own objectives.
TEST(Trainers, StrictlyDecreaseForTenEpochs) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto dims = testing::random_dims(rng, 6);
    const NetworkParams net = testing::random_net(dims, rng, 0.5);
    const TrainingData data = testing::random_data(dims, 10, rng);
    AdamConfig acfg;
    acfg.epochs = 10;
    BcdConfig bcfg;
    bcfg.epochs = 10;
    const TrainResult a = adam_train(net, data, acfg);
    const TrainResult b = bcd_train(net, data, bcfg);
    double prev_a = regression_objective(net, data, acfg.c1);
    double prev_b = bcd_objective(net, bcd_init_state(net, data.inputs), data, bcfg);
    for (int e = 0; e < 10; ++e) {
      EXPECT_LT(a.objective[static_cast<std::size_t>(e)], prev_a) << "adam trial " << trial;
      EXPECT_LT(b.objective[static_cast<std::size_t>(e)], prev_b) << "bcd trial " << trial;
      prev_a = a.objective[static_cast<std::size_t>(e)];
      prev_b = b.objective[static_cast<std::size_t>(e)];
    }
  }
}

TEST(Trainers, RejectMismatchedData) {
  const NetworkParams net = zero_network({3, 2, 1});
  const TrainingData bad{Matrix::Zero(2, 4), Matrix::Zero(1, 4)};
  EXPECT_THROW(adam_train(net, bad, AdamConfig{}), DimensionError);
  EXPECT_THROW(bcd_train(net, bad, BcdConfig{}), DimensionError);
}

}  // namespace
}  // namespace urnet
