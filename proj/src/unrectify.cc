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

#include "urnet/unrectify.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace urnet {

void validate(const SampleState& state, const NetworkParams& net, Eigen::Index num_samples) {
  const int L = net.num_layers();
  if (state.num_hidden() != L - 1) throw DimensionError("state has wrong number of layers");
  for (int k = 1; k < L; ++k) {
    const LayerState& ls = state.layer(k);
    const Eigen::Index rows = net.layer_dims[k];
    for (const Matrix* m : {&ls.u, &ls.v, &ls.d, &ls.s, &ls.t}) {
      if (m->rows() != rows || m->cols() != num_samples)
        throw DimensionError("state layer " + std::to_string(k) + " has wrong shape");
      if (!m->allFinite())
        throw DimensionError("state layer " + std::to_string(k) + " has non-finite entries");
    }
    if (ls.d.minCoeff() < 0.0 || ls.d.maxCoeff() > 1.0)
      throw DimensionError("activation variable outside [0, 1]");
    if (ls.s.minCoeff() < 0.0 || ls.t.minCoeff() < 0.0)
      throw DimensionError("negative slack variable");
  }
}

Eigen::Index ConstraintResiduals::size() const {
  Eigen::Index n = 0;
  for (const auto& r : layers) n += 4 * r.r1.size();
  return n;
}

double ConstraintResiduals::squared_norm() const {
  double sum = 0.0;
  for (const auto& r : layers)
    sum += r.r1.squaredNorm() + r.r2.squaredNorm() + r.r3.squaredNorm() + r.r4.squaredNorm();
  return sum;
}

double ConstraintResiduals::norm() const { return std::sqrt(squared_norm()); }

double ConstraintResiduals::max_abs() const {
  double m = 0.0;
  for (const auto& r : layers) {
    for (const Matrix* x : {&r.r1, &r.r2, &r.r3, &r.r4})
      if (x->size() > 0) m = std::max(m, x->cwiseAbs().maxCoeff());
  }
  return m;
}

SampleState unrectify_forward(const NetworkParams& net, const Matrix& inputs) {
  if (inputs.rows() != net.input_dim())
    throw DimensionError("unrectify_forward: input rows mismatch");
  const int L = net.num_layers();
  SampleState state;
  state.layers.resize(L - 1);
  for (int k = 1; k < L; ++k) {
    LayerState& ls = state.layer(k);
    ls.u = net.W(k) * state.v(k - 1, inputs);
    ls.u.colwise() += net.b(k);
    ls.d = (ls.u.array() > 0.0).cast<double>().matrix();
    ls.v = ls.d.cwiseProduct(ls.u);
    ls.s = ls.u.cwiseMax(0.0);
    ls.t = (-ls.u).cwiseMax(0.0);
  }
  return state;
}

SampleState unrectify_forward(const NetworkParams& net, const Vector& x) {
  return unrectify_forward(net, Matrix(x));
}

Matrix output_from_state(const NetworkParams& net, const SampleState& state,
                         const Matrix& inputs) {
  const int L = net.num_layers();
  Matrix out = net.W(L) * state.v(L - 1, inputs);
  out.colwise() += net.b(L);
  return out;
}

ConstraintResiduals residuals(const NetworkParams& net, const Matrix& inputs,
                              const SampleState& state) {
  const int L = net.num_layers();
  if (state.num_hidden() != L - 1) throw DimensionError("residuals: layer count mismatch");
  ConstraintResiduals res;
  res.layers.resize(L - 1);
  for (int k = 1; k < L; ++k) {
    const LayerState& ls = state.layer(k);
    LayerResiduals& r = res.layers[k - 1];
    const Matrix du = ls.d.cwiseProduct(ls.u);
    r.r1 = ls.v - du;
    Matrix affine = net.W(k) * state.v(k - 1, inputs);
    affine.colwise() += net.b(k);
    r.r2 = ls.u - affine;
    r.r3 = du - ls.s;
    r.r4 = (1.0 - ls.d.array()).matrix().cwiseProduct(ls.u) + ls.t;
  }
  return res;
}

Lemma1Report lemma1_check(const SampleState& state, double u_floor, double d_tol) {
  Lemma1Report report;
  for (int k = 1; k <= state.num_hidden(); ++k) {
    const LayerState& ls = state.layer(k);
    for (Eigen::Index j = 0; j < ls.u.cols(); ++j) {
      for (Eigen::Index i = 0; i < ls.u.rows(); ++i) {
        const double u = ls.u(i, j);
        const double d = ls.d(i, j);
        if (std::abs(u) <= u_floor) {
          ++report.excluded_small_u;
          continue;
        }
        const double r3 = d * u - ls.s(i, j);
        const double r4 = (1.0 - d) * u + ls.t(i, j);
        const double bound = d_tol * std::abs(u);
        if (std::abs(r3) > bound || std::abs(r4) > bound) {
          ++report.excluded_infeasible;
          continue;
        }
        ++report.checked;
        if (std::min(d, 1.0 - d) <= d_tol) {
          ++report.passed;
        } else {
          report.failures.push_back({k, i, j, u, d});
        }
      }
    }
  }
  return report;
}

}  // namespace urnet
