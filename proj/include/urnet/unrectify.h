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

#ifndef URNET_UNRECTIFY_H_
#define URNET_UNRECTIFY_H_

#include <vector>

#include "urnet/model.h"

namespace urnet {

// Un-rectified variables of one hidden layer, one column per sample.
//   u: pre-activation, u = W_k v^{k-1} + b_k
//   v: post-activation, v = d * u
//   d: relaxed activation indicator in [0, 1]
//   s, t: nonnegative slacks for d*u - s = 0 and (1-d)*u + t = 0
struct LayerState {
  Matrix u, v, d, s, t;
};

// The split variables for hidden layers 1..L-1 of a batch of samples. The
// input layer v^0 is the data itself and is not stored.
struct SampleState {
  std::vector<LayerState> layers;

  int num_hidden() const { return static_cast<int>(layers.size()); }
  Eigen::Index num_samples() const { return layers.empty() ? 0 : layers.front().u.cols(); }
  const LayerState& layer(int k) const { return layers[k - 1]; }
  LayerState& layer(int k) { return layers[k - 1]; }

  // v^{k}, with v^0 = inputs.
  const Matrix& v(int k, const Matrix& inputs) const {
    return k == 0 ? inputs : layers[k - 1].v;
  }
};

// Throws DimensionError unless shapes match `net` and `num_samples`, or if
// d leaves [0, 1] or a slack goes negative.
void validate(const SampleState& state, const NetworkParams& net, Eigen::Index num_samples);

// Per-layer equality residuals of the un-rectified problem:
//   r1 = v - d*u
//   r2 = u - (W_k v^{k-1} + b_k)
//   r3 = d*u - s
//   r4 = (1 - d)*u + t
struct LayerResiduals {
  Matrix r1, r2, r3, r4;
};

struct ConstraintResiduals {
  std::vector<LayerResiduals> layers;

  // Length of the stacked residual vector, 4 * N * sum_k N_k.
  Eigen::Index size() const;
  double squared_norm() const;
  double norm() const;
  double max_abs() const;
};

// Exact lifting of the forward pass: u from the affine map, d = [u > 0],
// v = d*u, s = relu(u), t = relu(-u). Ties at u == 0 give d = 0.
SampleState unrectify_forward(const NetworkParams& net, const Matrix& inputs);
SampleState unrectify_forward(const NetworkParams& net, const Vector& x);

// Applies the output map M_L to v^{L-1} of `state`.
Matrix output_from_state(const NetworkParams& net, const SampleState& state,
                         const Matrix& inputs);

ConstraintResiduals residuals(const NetworkParams& net, const Matrix& inputs,
                              const SampleState& state);

struct Lemma1Failure {
  int layer;
  Eigen::Index unit;
  Eigen::Index sample;
  double u, d;
};

struct Lemma1Report {
  long checked = 0;
  long passed = 0;
  long excluded_small_u = 0;
  long excluded_infeasible = 0;
  std::vector<Lemma1Failure> failures;

  bool ok() const { return failures.empty(); }
};

// For every unit with |u| > u_floor whose complementarity residuals
// |d*u - s| and |(1-d)*u + t| are both below d_tol*|u|, checks that d is
// within d_tol of {0, 1}.
Lemma1Report lemma1_check(const SampleState& state, double u_floor, double d_tol);

}  // namespace urnet

#endif  // URNET_UNRECTIFY_H_
