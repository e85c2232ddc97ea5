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

#include "urnet/auglag.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace urnet {
namespace {

// lambda-bar_i = rho_i r_i + mu_i per family, plus the output error
// e = M_L v^{L-1} - y. Everything in the gradient is linear in these.
struct Forcing {
  std::vector<LayerDuals> layers;
  Matrix output_error;
};

Forcing make_forcing(const NetworkParams& net, const SampleState& state, const DualState& duals,
                     const PenaltyParams& pen, const TrainingData& data, bool with_penalty) {
  const ConstraintResiduals res = residuals(net, data.inputs, state);
  Forcing f;
  f.layers.resize(res.layers.size());
  for (std::size_t k = 0; k < res.layers.size(); ++k) {
    const LayerResiduals& r = res.layers[k];
    const LayerDuals& mu = duals.layers[k];
    LayerDuals& a = f.layers[k];
    if (with_penalty) {
      a.mu1 = pen.rho1 * r.r1 + mu.mu1;
      a.mu2 = pen.rho2 * r.r2 + mu.mu2;
      a.mu3 = pen.rho3 * r.r3 + mu.mu3;
      a.mu4 = pen.rho4 * r.r4 + mu.mu4;
    } else {
      a = mu;
    }
  }
  f.output_error = output_from_state(net, state, data.inputs) - data.targets;
  return f;
}

AuglagGradient gradient_from_forcing(const NetworkParams& net, const SampleState& state,
                                     const PenaltyParams& pen, const TrainingData& data,
                                     const Forcing& f) {
  const int L = net.num_layers();
  AuglagGradient g;
  g.W.resize(L);
  g.b.resize(L);
  g.hidden.resize(L - 1);

  g.W[L - 1] = f.output_error * state.v(L - 1, data.inputs).transpose() + pen.c1 * net.W(L);
  g.b[L - 1] = f.output_error.rowwise().sum();

  for (int k = 1; k < L; ++k) {
    const LayerState& ls = state.layer(k);
    const LayerDuals& a = f.layers[k - 1];
    LayerState& gk = g.hidden[k - 1];
    const Matrix one_minus_d = (1.0 - ls.d.array()).matrix();

    g.W[k - 1] = -a.mu2 * state.v(k - 1, data.inputs).transpose() + pen.c1 * net.W(k);
    g.b[k - 1] = -a.mu2.rowwise().sum();

    if (k == L - 1) {
      gk.v = a.mu1 + net.W(L).transpose() * f.output_error;
    } else {
      gk.v = a.mu1 - net.W(k + 1).transpose() * f.layers[k].mu2;
    }
    gk.u = -ls.d.cwiseProduct(a.mu1) + a.mu2 + ls.d.cwiseProduct(a.mu3) +
           one_minus_d.cwiseProduct(a.mu4);
    gk.d = ls.u.cwiseProduct(-a.mu1 + a.mu3 - a.mu4) + pen.c2 * ls.d;
    gk.s = -a.mu3;
    gk.t = a.mu4;
  }
  return g;
}

double objective_without_constraints(const NetworkParams& net, const SampleState& state,
                                     const PenaltyParams& pen, const TrainingData& data,
                                     AuglagTerms& terms) {
  const Matrix err = output_from_state(net, state, data.inputs) - data.targets;
  terms.loss = 0.5 * err.squaredNorm();
  double wsum = 0.0;
  for (const Matrix& W : net.weights) wsum += W.squaredNorm();
  terms.weight_reg = 0.5 * pen.c1 * wsum;
  double dsum = 0.0;
  for (const LayerState& ls : state.layers) dsum += ls.d.squaredNorm();
  terms.activation_reg = 0.5 * pen.c2 * dsum;
  return terms.loss + terms.weight_reg + terms.activation_reg;
}

void check_shapes(const NetworkParams& net, const SampleState& state, const DualState& duals,
                  const TrainingData& data) {
  const int L = net.num_layers();
  if (data.inputs.rows() != net.input_dim() || data.targets.rows() != net.output_dim() ||
      data.inputs.cols() != data.targets.cols())
    throw DimensionError("training data does not match network dimensions");
  if (state.num_hidden() != L - 1 || static_cast<int>(duals.layers.size()) != L - 1)
    throw DimensionError("state/duals layer count mismatch");
  if (state.num_samples() != data.size() ||
      (L > 1 && duals.layers.front().mu1.cols() != data.size()))
    throw DimensionError("state/duals sample count mismatch");
}

}  // namespace

PenaltyParams PenaltyParams::scaled(double scale) const {
  PenaltyParams p = *this;
  p.rho1 *= scale;
  p.rho2 *= scale;
  p.rho3 *= scale;
  p.rho4 *= scale;
  return p;
}

void PenaltyParams::validate() const {
  if (!(rho1 > 0 && rho2 > 0 && rho3 > 0 && rho4 > 0))
    throw std::invalid_argument("penalty parameters must be positive");
  if (!(c1 > 0 && c2 > 0)) throw std::invalid_argument("c1 and c2 must be positive");
}

DualState DualState::zeros(const NetworkParams& net, Eigen::Index num_samples) {
  DualState duals;
  for (int k = 1; k < net.num_layers(); ++k) {
    const Eigen::Index n = net.layer_dims[k];
    duals.layers.push_back({Matrix::Zero(n, num_samples), Matrix::Zero(n, num_samples),
                            Matrix::Zero(n, num_samples), Matrix::Zero(n, num_samples)});
  }
  return duals;
}

AuglagTerms eval_auglag_terms(const NetworkParams& net, const SampleState& state,
                              const DualState& duals, const PenaltyParams& pen,
                              const TrainingData& data) {
  check_shapes(net, state, duals, data);
  AuglagTerms terms;
  objective_without_constraints(net, state, pen, data, terms);
  const ConstraintResiduals res = residuals(net, data.inputs, state);
  for (std::size_t k = 0; k < res.layers.size(); ++k) {
    const LayerResiduals& r = res.layers[k];
    const LayerDuals& mu = duals.layers[k];
    terms.penalty += 0.5 * (pen.rho1 * r.r1.squaredNorm() + pen.rho2 * r.r2.squaredNorm() +
                            pen.rho3 * r.r3.squaredNorm() + pen.rho4 * r.r4.squaredNorm());
    terms.linear += mu.mu1.cwiseProduct(r.r1).sum() + mu.mu2.cwiseProduct(r.r2).sum() +
                    mu.mu3.cwiseProduct(r.r3).sum() + mu.mu4.cwiseProduct(r.r4).sum();
  }
  return terms;
}

double eval_auglag(const NetworkParams& net, const SampleState& state, const DualState& duals,
                   const PenaltyParams& pen, const TrainingData& data) {
  return eval_auglag_terms(net, state, duals, pen, data).total();
}

double eval_lagrangian(const NetworkParams& net, const SampleState& state,
                       const DualState& multipliers, const PenaltyParams& pen,
                       const TrainingData& data) {
  PenaltyParams no_penalty = pen;
  no_penalty.rho1 = no_penalty.rho2 = no_penalty.rho3 = no_penalty.rho4 = 0.0;
  return eval_auglag(net, state, multipliers, no_penalty, data);
}

double AuglagGradient::squared_norm() const {
  double sum = 0.0;
  for (const Matrix& m : W) sum += m.squaredNorm();
  for (const Vector& v : b) sum += v.squaredNorm();
  for (const LayerState& h : hidden)
    sum += h.u.squaredNorm() + h.v.squaredNorm() + h.d.squaredNorm() + h.s.squaredNorm() +
           h.t.squaredNorm();
  return sum;
}

AuglagGradient grad_auglag(const NetworkParams& net, const SampleState& state,
                           const DualState& duals, const PenaltyParams& pen,
                           const TrainingData& data) {
  check_shapes(net, state, duals, data);
  return gradient_from_forcing(net, state, pen, data,
                               make_forcing(net, state, duals, pen, data, true));
}

AuglagGradient grad_lagrangian(const NetworkParams& net, const SampleState& state,
                               const DualState& multipliers, const PenaltyParams& pen,
                               const TrainingData& data) {
  check_shapes(net, state, multipliers, data);
  return gradient_from_forcing(net, state, pen, data,
                               make_forcing(net, state, multipliers, pen, data, false));
}

Matrix grad_auglag_block(const BlockId& block, const NetworkParams& net, const SampleState& state,
                         const DualState& duals, const PenaltyParams& pen,
                         const TrainingData& data) {
  const int L = net.num_layers();
  const bool weight_block = block.kind == BlockKind::W || block.kind == BlockKind::b;
  const int max_layer = weight_block ? L : L - 1;
  if (block.layer < 1 || block.layer > max_layer)
    throw std::invalid_argument("unknown block: layer " + std::to_string(block.layer) +
                                " out of range");
  if (block.sample >= data.size())
    throw std::invalid_argument("unknown block: sample index out of range");

  const AuglagGradient g = grad_auglag(net, state, duals, pen, data);
  if (block.kind == BlockKind::W) return g.W[block.layer - 1];
  if (block.kind == BlockKind::b) return g.b[block.layer - 1];

  const LayerState& h = g.hidden[block.layer - 1];
  const Matrix* m = nullptr;
  switch (block.kind) {
    case BlockKind::u: m = &h.u; break;
    case BlockKind::v: m = &h.v; break;
    case BlockKind::d: m = &h.d; break;
    case BlockKind::s: m = &h.s; break;
    case BlockKind::t: m = &h.t; break;
    default: throw std::invalid_argument("unknown block kind");
  }
  if (block.sample < 0) return *m;
  return m->col(block.sample);
}

double project_bound(double x, double v, double lower, double upper) {
  if (std::isinf(lower) && std::isinf(upper)) return v;
  const double step = x - v;
  if (step <= lower) return x - lower;
  if (step >= upper) return x - upper;
  return v;
}

double projected_gradient_norm(const SampleState& state, const AuglagGradient& grad) {
  double sum = 0.0;
  for (const Matrix& m : grad.W) sum += m.squaredNorm();
  for (const Vector& v : grad.b) sum += v.squaredNorm();
  for (std::size_t k = 0; k < state.layers.size(); ++k) {
    const LayerState& ls = state.layers[k];
    const LayerState& g = grad.hidden[k];
    sum += g.u.squaredNorm() + g.v.squaredNorm();
    for (Eigen::Index j = 0; j < ls.d.cols(); ++j) {
      for (Eigen::Index i = 0; i < ls.d.rows(); ++i) {
        const double pd = project_bound(ls.d(i, j), g.d(i, j), 0.0, 1.0);
        const double ps = project_bound(ls.s(i, j), g.s(i, j), 0.0, kUnbounded);
        const double pt = project_bound(ls.t(i, j), g.t(i, j), 0.0, kUnbounded);
        sum += pd * pd + ps * ps + pt * pt;
      }
    }
  }
  return std::sqrt(sum);
}

double kkt_residual(const NetworkParams& net, const SampleState& state, const DualState& duals,
                    const PenaltyParams& pen, const TrainingData& data) {
  return projected_gradient_norm(state, grad_auglag(net, state, duals, pen, data));
}

DualState dual_update(const DualState& duals, const SampleState& state, const NetworkParams& net,
                      const PenaltyParams& pen, const Matrix& inputs) {
  const ConstraintResiduals res = residuals(net, inputs, state);
  DualState out = duals;
  for (std::size_t k = 0; k < res.layers.size(); ++k) {
    const LayerResiduals& r = res.layers[k];
    LayerDuals& mu = out.layers[k];
    mu.mu1 += pen.rho1 * r.r1;
    mu.mu2 += pen.rho2 * r.r2;
    mu.mu3 += pen.rho3 * r.r3;
    mu.mu4 += pen.rho4 * r.r4;
  }
  return out;
}

}  // namespace urnet
