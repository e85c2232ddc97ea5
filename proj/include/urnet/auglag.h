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

#ifndef URNET_AUGLAG_H_
#define URNET_AUGLAG_H_

#include <limits>
#include <vector>

#include "urnet/model.h"
#include "urnet/unrectify.h"

namespace urnet {

// Penalty weights of the four constraint families plus the two regularizer
// coefficients (c1 on ||W||_F^2, c2 on ||d||^2).
struct PenaltyParams {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double rho3 = 100.0;
  double rho4 = 100.0;
  double c1 = 1e-3;
  double c2 = 1e-6;

  // All four rho multiplied by `scale`; c1, c2 untouched.
  PenaltyParams scaled(double scale) const;
  void validate() const;
};

struct LayerDuals {
  Matrix mu1, mu2, mu3, mu4;
};

// Multipliers for the four equality families, shaped like the residuals.
struct DualState {
  std::vector<LayerDuals> layers;

  static DualState zeros(const NetworkParams& net, Eigen::Index num_samples);
  const LayerDuals& layer(int k) const { return layers[k - 1]; }
  LayerDuals& layer(int k) { return layers[k - 1]; }
};

struct AuglagTerms {
  double loss = 0.0;            // 1/2 sum_j ||y_j - M_L v_j^{L-1}||^2
  double penalty = 0.0;         // sum rho_i/2 r_i^2
  double linear = 0.0;          // sum mu_i r_i
  double weight_reg = 0.0;      // c1/2 sum ||W_l||_F^2
  double activation_reg = 0.0;  // c2/2 sum ||d||^2

  double total() const { return loss + penalty + linear + weight_reg + activation_reg; }
};

AuglagTerms eval_auglag_terms(const NetworkParams& net, const SampleState& state,
                              const DualState& duals, const PenaltyParams& pen,
                              const TrainingData& data);

double eval_auglag(const NetworkParams& net, const SampleState& state, const DualState& duals,
                   const PenaltyParams& pen, const TrainingData& data);

// Ordinary Lagrangian: objective + sum lambda_i r_i, with no quadratic
// penalty. Only c1, c2 of `pen` are used.
double eval_lagrangian(const NetworkParams& net, const SampleState& state,
                       const DualState& multipliers, const PenaltyParams& pen,
                       const TrainingData& data);

// Partial derivatives with respect to every primal block. The hidden-layer
// fields of `hidden` hold d/du, d/dv, d/dd, d/ds, d/dt.
struct AuglagGradient {
  std::vector<Matrix> W;
  std::vector<Vector> b;
  std::vector<LayerState> hidden;

  double squared_norm() const;
};

AuglagGradient grad_auglag(const NetworkParams& net, const SampleState& state,
                           const DualState& duals, const PenaltyParams& pen,
                           const TrainingData& data);

AuglagGradient grad_lagrangian(const NetworkParams& net, const SampleState& state,
                               const DualState& multipliers, const PenaltyParams& pen,
                               const TrainingData& data);

enum class BlockKind { W, b, u, v, d, s, t };

// `layer` is 1..L for W, b and 1..L-1 for the hidden blocks. `sample` < 0
// selects every sample (N_k x N result); otherwise a single column.
struct BlockId {
  BlockKind kind;
  int layer;
  Eigen::Index sample = -1;
};

// Throws std::invalid_argument for a block that does not exist.
Matrix grad_auglag_block(const BlockId& block, const NetworkParams& net, const SampleState& state,
                         const DualState& duals, const PenaltyParams& pen,
                         const TrainingData& data);

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Component of the bound-projected gradient P(x, v) = x - Proj_[l,u](x - v).
double project_bound(double x, double v, double lower = -kUnbounded,
                     double upper = kUnbounded);

// ||P(alpha, grad L)|| with d in [0,1], s, t >= 0 and every other block free.
double kkt_residual(const NetworkParams& net, const SampleState& state, const DualState& duals,
                    const PenaltyParams& pen, const TrainingData& data);

// Same norm from an already computed gradient.
double projected_gradient_norm(const SampleState& state, const AuglagGradient& grad);

// mu_i += rho_i * r_i for all four families.
DualState dual_update(const DualState& duals, const SampleState& state, const NetworkParams& net,
                      const PenaltyParams& pen, const Matrix& inputs);

}  // namespace urnet

#endif  // URNET_AUGLAG_H_
