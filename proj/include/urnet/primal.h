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

#ifndef URNET_PRIMAL_H_
#define URNET_PRIMAL_H_

#include <functional>
#include <vector>

#include "urnet/auglag.h"

namespace urnet {

// Closed-form block minimizers of the augmented Lagrangian with the duals
// held fixed. Each returns the new value of its block for every sample; the
// inputs are left untouched. `layer` follows the 1-based convention of
// NetworkParams (1..L for W, b and 1..L-1 for the hidden blocks).

Matrix update_W(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const TrainingData& data);

Vector update_b(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const TrainingData& data);

// Exact minimizer over [0, 1] of the separable scalar quadratic in d.
Matrix update_d(int layer, const SampleState& state, const DualState& duals,
                const PenaltyParams& pen);

// Diagonal closed form; u appears only in per-unit terms.
Matrix update_u(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const Matrix& inputs);

enum class VMode {
  kFree,         // v unconstrained: exact block minimizer
  kNonnegative,  // clamp to [0, inf) after the unconstrained solve
};

Matrix update_v(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const TrainingData& data,
                VMode mode = VMode::kFree);

Matrix update_s(int layer, const SampleState& state, const DualState& duals,
                const PenaltyParams& pen);
Matrix update_t(int layer, const SampleState& state, const DualState& duals,
                const PenaltyParams& pen);

// W_L, b_L, then for l = L-1 .. 1: v_l, d_l, u_l, s_l, t_l, W_l, b_l.
std::vector<BlockId> sweep_order(int num_layers);

struct BlockEvent {
  int sweep;
  BlockId block;
  double value;  // augmented Lagrangian after the update
};

struct SweepOptions {
  VMode v_mode = VMode::kFree;
  // Called after every block update; evaluating the objective for it costs
  // one extra pass per block, so leave empty outside of diagnostics.
  std::function<void(const BlockEvent&)> on_block;
  // inner_solve evaluates the KKT residual every kkt_interval sweeps and
  // after the last one; on_sweep fires at those points.
  int kkt_interval = 1;
  std::function<void(int sweep, double value, double kkt)> on_sweep;
};

// Applies one block update in place.
void apply_block_update(const BlockId& block, NetworkParams& net, SampleState& state,
                        const DualState& duals, const PenaltyParams& pen,
                        const TrainingData& data, VMode v_mode);

// One pass over sweep_order(). Returns the augmented Lagrangian afterwards.
double inner_sweep(NetworkParams& net, SampleState& state, const DualState& duals,
                   const PenaltyParams& pen, const TrainingData& data,
                   const SweepOptions& options = {}, int sweep_index = 0);

struct InnerResult {
  int sweeps = 0;
  int newton_iterations = 0;
  bool converged = false;  // kkt <= omega after at least one sweep
  double kkt = 0.0;
  double value = 0.0;
};

// Mini-batch variant of one sweep: per-sample blocks and the weight
// reductions only see one column subset at a time. `batches` partitions the
// sample indices.
double inner_sweep_batched(NetworkParams& net, SampleState& state, const DualState& duals,
                           const PenaltyParams& pen, const TrainingData& data,
                           const std::vector<std::vector<Eigen::Index>>& batches,
                           const SweepOptions& options = {});

// Repeats inner_sweep until kkt_residual <= omega or max_sweeps is reached.
// Throws DivergenceError if the objective becomes non-finite.
InnerResult inner_solve(NetworkParams& net, SampleState& state, const DualState& duals,
                        const PenaltyParams& pen, const TrainingData& data, double omega,
                        int max_sweeps, const SweepOptions& options = {});

// Active-set projected Newton on the same objective with the exact Hessian.
// Stops once kkt_residual <= omega, after max_iterations, or when no descent
// step is found; InnerResult::sweeps counts Newton iterations.
InnerResult projected_newton_solve(NetworkParams& net, SampleState& state, const DualState& duals,
                                   const PenaltyParams& pen, const TrainingData& data, double omega,
                                   int max_iterations);

}  // namespace urnet

#endif  // URNET_PRIMAL_H_
