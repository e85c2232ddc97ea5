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

#ifndef URNET_BASELINES_H_
#define URNET_BASELINES_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "urnet/model.h"

namespace urnet {

// Objective shared by both comparators and reported in their traces:
//   1/2 ||Y - M_L X||_F^2 + c1/2 sum_l ||W_l||_F^2
double regression_objective(const NetworkParams& net, const TrainingData& data, double c1);

// Back-propagated gradient of regression_objective over the given columns,
// with the data term scaled by `data_weight`.
struct ParamGradient {
  std::vector<Matrix> W;
  std::vector<Vector> b;
};
ParamGradient regression_gradient(const NetworkParams& net, const Matrix& inputs,
                                  const Matrix& targets, double c1, double data_weight = 1.0);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 100;
  int batch_size = 0;  // 0: full batch
  double c1 = 1e-3;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

struct TrainResult {
  NetworkParams net;
  // Trainer's own full-data objective after every epoch: regression_objective
  // for Adam, bcd_objective for BCD.
  std::vector<double> objective;
};

// Mini-batch gradients are rescaled by N / |batch| so every step estimates the
// full-batch objective. Throws DivergenceError on a non-finite objective.
TrainResult adam_train(const NetworkParams& net0, const TrainingData& data, const AdamConfig& cfg);

// Three-splitting penalty formulation:
//   1/2 ||Y - W_L V_{L-1} - b_L||^2
//   + gamma sum_l (||V_l - relu(U_l)||^2 + ||U_l - W_l V_{l-1} - b_l||^2)
//   + c1/2 sum_l ||W_l||^2
struct BcdConfig {
  double gamma = 1.0;
  int epochs = 100;
  int sweeps_per_epoch = 1;
  double c1 = 1e-3;

  void validate() const;
};

struct BcdState {
  std::vector<Matrix> U;  // hidden layers 1..L-1, stored at [l - 1]
  std::vector<Matrix> V;
};

BcdState bcd_init_state(const NetworkParams& net, const Matrix& inputs);

double bcd_objective(const NetworkParams& net, const BcdState& state, const TrainingData& data,
                     const BcdConfig& cfg);

// Exact minimizer of (v - relu(u))^2 + (u - m)^2 over u, by comparing the
// u >= 0 and u <= 0 branches.
double bcd_u_scalar(double v, double m);

enum class BcdBlock { W, b, V, U };
struct BcdBlockEvent {
  BcdBlock block;
  int layer;
  double objective;
};

// One reverse-order sweep: W_L, b_L, then for l = L-1 .. 1: V_l, U_l, W_l, b_l.
void bcd_sweep(NetworkParams& net, BcdState& state, const TrainingData& data,
               const BcdConfig& cfg, const std::function<void(const BcdBlockEvent&)>& on_block = {});

TrainResult bcd_train(const NetworkParams& net0, const TrainingData& data, const BcdConfig& cfg);

}  // namespace urnet

#endif  // URNET_BASELINES_H_
