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

#include "urnet/primal.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace urnet {
namespace {

void check_hidden_layer(int layer, const SampleState& state) {
  if (layer < 1 || layer > state.num_hidden())
    throw std::invalid_argument("hidden layer index " + std::to_string(layer) + " out of range");
}

// Solves X * G = R for symmetric positive definite G; reads the lower triangle.
Matrix right_solve_spd(const Matrix& G, const Matrix& R) {
  Eigen::LLT<Matrix, Eigen::Lower> llt(G);
  if (llt.info() != Eigen::Success) throw DivergenceError("Gram matrix is not positive definite");
  return llt.solve(R.transpose()).transpose();
}

// For many right-hand sides one GEMM with the small inverse beats a
// column-by-column triangular solve.
Matrix solve_spd(const Matrix& A, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw DivergenceError("system matrix is not positive definite");
  if (rhs.cols() <= 4 * A.rows()) return llt.solve(rhs);
  return llt.solve(Matrix::Identity(A.rows(), A.cols())) * rhs;
}

// Lower triangle of scale * X X^T + shift * I.
Matrix gram_lower(const Matrix& X, double scale, double shift) {
  Matrix gram = Matrix::Zero(X.rows(), X.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(X, scale);
  gram.diagonal().array() += shift;
  return gram;
}

Matrix gather_cols(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(c) = m.col(cols[c]);
  return out;
}

void scatter_cols(const Matrix& src, const std::vector<Eigen::Index>& cols, Matrix& dst) {
  for (std::size_t c = 0; c < cols.size(); ++c) dst.col(cols[c]) = src.col(c);
}

}  // namespace

Matrix update_W(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const TrainingData& data) {
  const int L = net.num_layers();
  if (layer < 1 || layer > L) throw std::invalid_argument("update_W: layer out of range");
  const Matrix& prev = state.v(layer - 1, data.inputs);
  Matrix gram;
  Matrix rhs;
  if (layer == L) {
    gram = gram_lower(prev, 1.0, pen.c1);
    Matrix target = data.targets;
    target.colwise() -= net.b(L);
    rhs = target * prev.transpose();
  } else {
    gram = gram_lower(prev, pen.rho2, pen.c1);
    Matrix target = state.layer(layer).u;
    target.colwise() -= net.b(layer);
    rhs = (pen.rho2 * target + duals.layer(layer).mu2) * prev.transpose();
  }
  if (!gram.allFinite() || !rhs.allFinite()) throw DivergenceError("update_W: non-finite input");
  return right_solve_spd(gram, rhs);
}

Vector update_b(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const TrainingData& data) {
  const int L = net.num_layers();
  if (layer < 1 || layer > L) throw std::invalid_argument("update_b: layer out of range");
  const double inv_n = 1.0 / static_cast<double>(data.size());
  const Matrix& prev = state.v(layer - 1, data.inputs);
  if (layer == L) {
    return inv_n * (data.targets - net.W(L) * prev).rowwise().sum();
  }
  const Matrix diff =
      state.layer(layer).u - net.W(layer) * prev + duals.layer(layer).mu2 / pen.rho2;
  return inv_n * diff.rowwise().sum();
}

Matrix update_d(int layer, const SampleState& state, const DualState& duals,
                const PenaltyParams& pen) {
  check_hidden_layer(layer, state);
  const LayerState& ls = state.layer(layer);
  const LayerDuals& mu = duals.layer(layer);
  const auto u = ls.u.array();
  const auto numer = (pen.rho1 * ls.v.array() + pen.rho3 * ls.s.array() +
                      pen.rho4 * (u + ls.t.array()) + mu.mu1.array() - mu.mu3.array() +
                      mu.mu4.array()) *
                     u;
  const auto denom = (pen.rho1 + pen.rho3 + pen.rho4) * u.square() + pen.c2;
  return (numer / denom).cwiseMax(0.0).cwiseMin(1.0).matrix();
}

Matrix update_u(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const Matrix& inputs) {
  check_hidden_layer(layer, state);
  const LayerState& ls = state.layer(layer);
  const LayerDuals& mu = duals.layer(layer);
  Matrix affine = net.W(layer) * state.v(layer - 1, inputs);
  affine.colwise() += net.b(layer);

  const auto d = ls.d.array();
  const auto one_minus_d = 1.0 - d;
  const auto numer = pen.rho1 * d * ls.v.array() + pen.rho2 * affine.array() +
                     pen.rho3 * d * ls.s.array() - pen.rho4 * one_minus_d * ls.t.array() +
                     d * mu.mu1.array() - mu.mu2.array() - d * mu.mu3.array() -
                     one_minus_d * mu.mu4.array();
  const auto denom = (pen.rho1 + pen.rho3) * d.square() + pen.rho2 + pen.rho4 * one_minus_d.square();
  return (numer / denom).matrix();
}

Matrix update_v(int layer, const NetworkParams& net, const SampleState& state,
                const DualState& duals, const PenaltyParams& pen, const TrainingData& data,
                VMode mode) {
  check_hidden_layer(layer, state);
  const int L = net.num_layers();
  const LayerState& ls = state.layer(layer);
  const Matrix& next_W = net.W(layer + 1);

  Matrix system;
  Matrix rhs = pen.rho1 * ls.d.cwiseProduct(ls.u) - duals.layer(layer).mu1;
  if (layer == L - 1) {
    system = next_W.transpose() * next_W;
    Matrix target = data.targets;
    target.colwise() -= net.b(L);
    rhs += next_W.transpose() * target;
  } else {
    system = pen.rho2 * (next_W.transpose() * next_W);
    Matrix target = state.layer(layer + 1).u;
    target.colwise() -= net.b(layer + 1);
    rhs += next_W.transpose() * (pen.rho2 * target + duals.layer(layer + 1).mu2);
  }
  system.diagonal().array() += pen.rho1;
  if (!system.allFinite() || !rhs.allFinite()) throw DivergenceError("update_v: non-finite input");
  Matrix v = solve_spd(system, rhs);
  if (mode == VMode::kNonnegative) v = v.cwiseMax(0.0);
  return v;
}

Matrix update_s(int layer, const SampleState& state, const DualState& duals,
                const PenaltyParams& pen) {
  check_hidden_layer(layer, state);
  const LayerState& ls = state.layer(layer);
  return (ls.d.cwiseProduct(ls.u) + duals.layer(layer).mu3 / pen.rho3).cwiseMax(0.0);
}

Matrix update_t(int layer, const SampleState& state, const DualState& duals,
                const PenaltyParams& pen) {
  check_hidden_layer(layer, state);
  const LayerState& ls = state.layer(layer);
  const Matrix d_minus_one = (ls.d.array() - 1.0).matrix();
  return (d_minus_one.cwiseProduct(ls.u) - duals.layer(layer).mu4 / pen.rho4).cwiseMax(0.0);
}

std::vector<BlockId> sweep_order(int num_layers) {
  std::vector<BlockId> order;
  order.push_back({BlockKind::W, num_layers});
  order.push_back({BlockKind::b, num_layers});
  for (int l = num_layers - 1; l >= 1; --l) {
    for (BlockKind kind : {BlockKind::v, BlockKind::d, BlockKind::u, BlockKind::s, BlockKind::t,
                           BlockKind::W, BlockKind::b}) {
      order.push_back({kind, l});
    }
  }
  return order;
}

void apply_block_update(const BlockId& block, NetworkParams& net, SampleState& state,
                        const DualState& duals, const PenaltyParams& pen,
                        const TrainingData& data, VMode v_mode) {
  const int l = block.layer;
  switch (block.kind) {
    case BlockKind::W: net.W(l) = update_W(l, net, state, duals, pen, data); break;
    case BlockKind::b: net.b(l) = update_b(l, net, state, duals, pen, data); break;
    case BlockKind::v: state.layer(l).v = update_v(l, net, state, duals, pen, data, v_mode); break;
    case BlockKind::d: state.layer(l).d = update_d(l, state, duals, pen); break;
    case BlockKind::u: state.layer(l).u = update_u(l, net, state, duals, pen, data.inputs); break;
    case BlockKind::s: state.layer(l).s = update_s(l, state, duals, pen); break;
    case BlockKind::t: state.layer(l).t = update_t(l, state, duals, pen); break;
  }
}

double inner_sweep(NetworkParams& net, SampleState& state, const DualState& duals,
                   const PenaltyParams& pen, const TrainingData& data,
                   const SweepOptions& options, int sweep_index) {
  for (const BlockId& block : sweep_order(net.num_layers())) {
    apply_block_update(block, net, state, duals, pen, data, options.v_mode);
    if (options.on_block) {
      options.on_block({sweep_index, block, eval_auglag(net, state, duals, pen, data)});
    }
  }
  return eval_auglag(net, state, duals, pen, data);
}

double inner_sweep_batched(NetworkParams& net, SampleState& state, const DualState& duals,
                           const PenaltyParams& pen, const TrainingData& data,
                           const std::vector<std::vector<Eigen::Index>>& batches,
                           const SweepOptions& options) {
  for (const auto& cols : batches) {
    TrainingData sub{gather_cols(data.inputs, cols), gather_cols(data.targets, cols)};
    SampleState sub_state;
    DualState sub_duals;
    for (const LayerState& ls : state.layers) {
      sub_state.layers.push_back({gather_cols(ls.u, cols), gather_cols(ls.v, cols),
                                  gather_cols(ls.d, cols), gather_cols(ls.s, cols),
                                  gather_cols(ls.t, cols)});
    }
    for (const LayerDuals& mu : duals.layers) {
      sub_duals.layers.push_back({gather_cols(mu.mu1, cols), gather_cols(mu.mu2, cols),
                                  gather_cols(mu.mu3, cols), gather_cols(mu.mu4, cols)});
    }
    SweepOptions batch_options;
    batch_options.v_mode = options.v_mode;
    inner_sweep(net, sub_state, sub_duals, pen, sub, batch_options);
    for (std::size_t k = 0; k < state.layers.size(); ++k) {
      LayerState& ls = state.layers[k];
      const LayerState& sub_ls = sub_state.layers[k];
      scatter_cols(sub_ls.u, cols, ls.u);
      scatter_cols(sub_ls.v, cols, ls.v);
      scatter_cols(sub_ls.d, cols, ls.d);
      scatter_cols(sub_ls.s, cols, ls.s);
      scatter_cols(sub_ls.t, cols, ls.t);
    }
  }
  return eval_auglag(net, state, duals, pen, data);
}

InnerResult inner_solve(NetworkParams& net, SampleState& state, const DualState& duals,
                        const PenaltyParams& pen, const TrainingData& data, double omega,
                        int max_sweeps, const SweepOptions& options) {
  if (!(omega > 0.0)) throw std::invalid_argument("inner_solve: omega must be positive");
  InnerResult result;
  result.value = eval_auglag(net, state, duals, pen, data);
  result.kkt = kkt_residual(net, state, duals, pen, data);
  while (result.sweeps < max_sweeps) {
    result.value = inner_sweep(net, state, duals, pen, data, options, result.sweeps);
    ++result.sweeps;
    if (!std::isfinite(result.value)) {
      throw DivergenceError("inner solve diverged after " + std::to_string(result.sweeps) +
                            " sweeps (non-finite augmented Lagrangian)");
    }
    const bool check = result.sweeps % std::max(1, options.kkt_interval) == 0 ||
                       result.sweeps == max_sweeps;
    if (!check) continue;
    result.kkt = kkt_residual(net, state, duals, pen, data);
    if (options.on_sweep) options.on_sweep(result.sweeps - 1, result.value, result.kkt);
    if (result.kkt <= omega) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace urnet
