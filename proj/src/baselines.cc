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

#include "urnet/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace urnet {
namespace {

void check_data(const NetworkParams& net, const TrainingData& data, const char* who) {
  validate(net);
  if (data.size() < 1) throw std::invalid_argument(std::string(who) + ": empty training data");
  if (data.inputs.rows() != net.input_dim() || data.targets.rows() != net.output_dim() ||
      data.targets.cols() != data.size())
    throw DimensionError(std::string(who) + ": data does not match network");
}

double weight_penalty(const NetworkParams& net, double c1) {
  double sum = 0.0;
  for (const Matrix& W : net.weights) sum += W.squaredNorm();
  return 0.5 * c1 * sum;
}

Matrix affine(const Matrix& W, const Vector& b, const Matrix& x) {
  Matrix out = W * x;
  out.colwise() += b;
  return out;
}

// X * G = R with G symmetric positive definite.
Matrix right_solve(const Matrix& G, const Matrix& R) {
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success) throw DivergenceError("bcd: Gram matrix is not positive definite");
  return llt.solve(R.transpose()).transpose();
}

Matrix solve(const Matrix& A, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw DivergenceError("bcd: system is not positive definite");
  return llt.solve(rhs);
}

Matrix gather_cols(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(c) = m.col(cols[c]);
  return out;
}

}  // namespace

double regression_objective(const NetworkParams& net, const TrainingData& data, double c1) {
  return 0.5 * (data.targets - forward(net, data.inputs)).squaredNorm() + weight_penalty(net, c1);
}

ParamGradient regression_gradient(const NetworkParams& net, const Matrix& inputs,
                                  const Matrix& targets, double c1, double data_weight) {
  const int L = net.num_layers();
  std::vector<Matrix> acts{inputs};  // acts[k] = v_k
  std::vector<Matrix> pre;           // pre[k - 1] = u_k
  for (int l = 1; l < L; ++l) {
    pre.push_back(affine(net.W(l), net.b(l), acts.back()));
    acts.push_back(pre.back().cwiseMax(0.0));
  }
  Matrix delta = data_weight * (affine(net.W(L), net.b(L), acts.back()) - targets);

  ParamGradient g;
  g.W.resize(L);
  g.b.resize(L);
  for (int l = L; l >= 1; --l) {
    g.W[l - 1] = delta * acts[l - 1].transpose() + c1 * net.W(l);
    g.b[l - 1] = delta.rowwise().sum();
    if (l > 1) {
      delta = (net.W(l).transpose() * delta).cwiseProduct(
          (pre[l - 2].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("adam: betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
  if (epochs < 0) throw ConfigError("adam: epochs must be non-negative");
  if (batch_size < 0) throw ConfigError("adam: batch size must be non-negative");
  if (!(c1 >= 0.0)) throw ConfigError("adam: c1 must be non-negative");
}

TrainResult adam_train(const NetworkParams& net0, const TrainingData& data, const AdamConfig& cfg) {
  cfg.validate();
  check_data(net0, data, "adam_train");
  const int L = net0.num_layers();
  const Eigen::Index n = data.size();
  const Eigen::Index batch = (cfg.batch_size <= 0 || cfg.batch_size >= n) ? n : cfg.batch_size;

  TrainResult result{net0, {}};
  NetworkParams& net = result.net;
  std::vector<Matrix> mW, vW;
  std::vector<Vector> mb, vb;
  for (int l = 1; l <= L; ++l) {
    mW.push_back(Matrix::Zero(net.W(l).rows(), net.W(l).cols()));
    vW.push_back(mW.back());
    mb.push_back(Vector::Zero(net.b(l).size()));
    vb.push_back(mb.back());
  }

  std::mt19937_64 rng(cfg.shuffle_seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  long step = 0;

  auto adam_step = [&](auto& param, auto& m, auto& v, const auto& grad, double c1t, double c2t) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    param.array() -= cfg.learning_rate * (m.array() / c1t) /
                     ((v.array() / c2t).sqrt() + cfg.epsilon);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += batch) {
      ParamGradient g;
      if (batch == n) {
        g = regression_gradient(net, data.inputs, data.targets, cfg.c1);
      } else {
        const Eigen::Index end = std::min(n, start + batch);
        const std::vector<Eigen::Index> cols(order.begin() + start, order.begin() + end);
        const double weight = static_cast<double>(n) / static_cast<double>(cols.size());
        g = regression_gradient(net, gather_cols(data.inputs, cols),
                                gather_cols(data.targets, cols), cfg.c1, weight);
      }
      ++step;
      const double c1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (int l = 1; l <= L; ++l) {
        adam_step(net.W(l), mW[l - 1], vW[l - 1], g.W[l - 1], c1t, c2t);
        adam_step(net.b(l), mb[l - 1], vb[l - 1], g.b[l - 1], c1t, c2t);
      }
    }
    const double obj = regression_objective(net, data, cfg.c1);
    if (!std::isfinite(obj))
      throw DivergenceError("adam diverged at epoch " + std::to_string(epoch));
    result.objective.push_back(obj);
  }
  return result;
}

void BcdConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("bcd: gamma must be positive");
  if (epochs < 0) throw ConfigError("bcd: epochs must be non-negative");
  if (sweeps_per_epoch < 1) throw ConfigError("bcd: sweeps per epoch must be at least 1");
  if (!(c1 >= 0.0)) throw ConfigError("bcd: c1 must be non-negative");
}

BcdState bcd_init_state(const NetworkParams& net, const Matrix& inputs) {
  BcdState state;
  Matrix prev = inputs;
  for (int l = 1; l < net.num_layers(); ++l) {
    state.U.push_back(affine(net.W(l), net.b(l), prev));
    state.V.push_back(state.U.back().cwiseMax(0.0));
    prev = state.V.back();
  }
  return state;
}

double bcd_objective(const NetworkParams& net, const BcdState& state, const TrainingData& data,
                     const BcdConfig& cfg) {
  const int L = net.num_layers();
  const Matrix& last = L > 1 ? state.V[L - 2] : data.inputs;
  double value = 0.5 * (data.targets - affine(net.W(L), net.b(L), last)).squaredNorm();
  for (int l = 1; l < L; ++l) {
    const Matrix& prev = l == 1 ? data.inputs : state.V[l - 2];
    value += cfg.gamma * ((state.V[l - 1] - state.U[l - 1].cwiseMax(0.0)).squaredNorm() +
                          (state.U[l - 1] - affine(net.W(l), net.b(l), prev)).squaredNorm());
  }
  return value + weight_penalty(net, cfg.c1);
}

double bcd_u_scalar(double v, double m) {
  const double pos = std::max(0.5 * (v + m), 0.0);
  const double neg = std::min(m, 0.0);
  const double f_pos = (v - pos) * (v - pos) + (pos - m) * (pos - m);
  const double f_neg = v * v + (neg - m) * (neg - m);
  return f_pos <= f_neg ? pos : neg;
}

void bcd_sweep(NetworkParams& net, BcdState& state, const TrainingData& data,
               const BcdConfig& cfg, const std::function<void(const BcdBlockEvent&)>& on_block) {
  const int L = net.num_layers();
  auto prev_of = [&](int l) -> const Matrix& { return l == 1 ? data.inputs : state.V[l - 2]; };
  auto emit = [&](BcdBlock block, int l) {
    if (on_block) on_block({block, l, bcd_objective(net, state, data, cfg)});
  };
  const double inv_n = 1.0 / static_cast<double>(data.size());

  {
    const Matrix& prev = prev_of(L);
    Matrix gram = prev * prev.transpose();
    gram.diagonal().array() += cfg.c1;
    Matrix target = data.targets;
    target.colwise() -= net.b(L);
    net.W(L) = right_solve(gram, target * prev.transpose());
    emit(BcdBlock::W, L);
    net.b(L) = inv_n * (data.targets - net.W(L) * prev).rowwise().sum();
    emit(BcdBlock::b, L);
  }

  for (int l = L - 1; l >= 1; --l) {
    const Matrix& next_W = net.W(l + 1);
    Matrix system = next_W.transpose() * next_W;
    Matrix rhs;
    if (l == L - 1) {
      // 1/2 loss + gamma ||V - relu(U)||^2
      Matrix target = data.targets;
      target.colwise() -= net.b(L);
      system.diagonal().array() += 2.0 * cfg.gamma;
      rhs = next_W.transpose() * target + 2.0 * cfg.gamma * state.U[l - 1].cwiseMax(0.0);
    } else {
      Matrix target = state.U[l];
      target.colwise() -= net.b(l + 1);
      system.diagonal().array() += 1.0;
      rhs = next_W.transpose() * target + state.U[l - 1].cwiseMax(0.0);
    }
    state.V[l - 1] = solve(system, rhs);
    emit(BcdBlock::V, l);

    const Matrix& prev = prev_of(l);
    const Matrix m = affine(net.W(l), net.b(l), prev);
    state.U[l - 1] = state.V[l - 1].binaryExpr(m, [](double v, double mm) {
      return bcd_u_scalar(v, mm);
    });
    emit(BcdBlock::U, l);

    Matrix gram = prev * prev.transpose();
    gram.diagonal().array() += cfg.c1 / (2.0 * cfg.gamma);
    Matrix target = state.U[l - 1];
    target.colwise() -= net.b(l);
    net.W(l) = right_solve(gram, target * prev.transpose());
    emit(BcdBlock::W, l);
    net.b(l) = inv_n * (state.U[l - 1] - net.W(l) * prev).rowwise().sum();
    emit(BcdBlock::b, l);
  }
}

TrainResult bcd_train(const NetworkParams& net0, const TrainingData& data, const BcdConfig& cfg) {
  cfg.validate();
  check_data(net0, data, "bcd_train");
  TrainResult result{net0, {}};
  BcdState state = bcd_init_state(net0, data.inputs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int s = 0; s < cfg.sweeps_per_epoch; ++s) bcd_sweep(result.net, state, data, cfg);
    const double obj = bcd_objective(result.net, state, data, cfg);
    if (!std::isfinite(obj))
      throw DivergenceError("bcd diverged at epoch " + std::to_string(epoch));
    result.objective.push_back(obj);
  }
  return result;
}

}  // namespace urnet
