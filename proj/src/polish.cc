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

// Projected Newton polish for the inner problem: active-set identification
// in the style of Bertsekas (1982), exact sparse Hessian, Levenberg damping
// for nonconvex directions and an Armijo search along the projection arc.
#include "urnet/primal.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace urnet {
namespace {

using Triplet = Eigen::Triplet<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Flat variable layout: W_l (column-major), b_l for l = 1..L, then for every
// hidden layer u, v, d, s, t (column-major N_k x N each).
class Layout {
 public:
  Layout(const NetworkParams& net, Eigen::Index num_samples) : L_(net.num_layers()), N_(num_samples) {
    Eigen::Index off = 0;
    for (int l = 1; l <= L_; ++l) {
      W_.push_back(off);
      off += net.W(l).size();
      b_.push_back(off);
      off += net.b(l).size();
    }
    for (int k = 1; k < L_; ++k) {
      hidden_.push_back(off);
      off += 5 * net.layer_dims[k] * N_;
      dims_.push_back(net.layer_dims[k]);
    }
    size_ = off;
  }

  Eigen::Index size() const { return size_; }
  Eigen::Index W(int l, Eigen::Index r, Eigen::Index c, Eigen::Index rows) const {
    return W_[l - 1] + c * rows + r;
  }
  Eigen::Index b(int l, Eigen::Index i) const { return b_[l - 1] + i; }
  // which: 0 u, 1 v, 2 d, 3 s, 4 t
  Eigen::Index hidden(int k, int which, Eigen::Index i, Eigen::Index j) const {
    return hidden_[k - 1] + (which * N_ + j) * dims_[k - 1] + i;
  }

  Vector pack(const NetworkParams& net, const SampleState& state) const {
    Vector x(size_);
    for (int l = 1; l <= L_; ++l) {
      x.segment(W_[l - 1], net.W(l).size()) = net.W(l).reshaped();
      x.segment(b_[l - 1], net.b(l).size()) = net.b(l);
    }
    for (int k = 1; k < L_; ++k) {
      const LayerState& ls = state.layer(k);
      const Eigen::Index n = ls.u.size();
      Eigen::Index off = hidden_[k - 1];
      for (const Matrix* m : {&ls.u, &ls.v, &ls.d, &ls.s, &ls.t}) {
        x.segment(off, n) = m->reshaped();
        off += n;
      }
    }
    return x;
  }

  void unpack(const Vector& x, NetworkParams& net, SampleState& state) const {
    for (int l = 1; l <= L_; ++l) {
      net.W(l).reshaped() = x.segment(W_[l - 1], net.W(l).size());
      net.b(l) = x.segment(b_[l - 1], net.b(l).size());
    }
    for (int k = 1; k < L_; ++k) {
      LayerState& ls = state.layer(k);
      const Eigen::Index n = ls.u.size();
      Eigen::Index off = hidden_[k - 1];
      for (Matrix* m : {&ls.u, &ls.v, &ls.d, &ls.s, &ls.t}) {
        m->reshaped() = x.segment(off, n);
        off += n;
      }
    }
  }

  Vector pack_gradient(const AuglagGradient& g) const {
    Vector x(size_);
    for (int l = 1; l <= L_; ++l) {
      x.segment(W_[l - 1], g.W[l - 1].size()) = g.W[l - 1].reshaped();
      x.segment(b_[l - 1], g.b[l - 1].size()) = g.b[l - 1];
    }
    for (int k = 1; k < L_; ++k) {
      const LayerState& h = g.hidden[k - 1];
      const Eigen::Index n = h.u.size();
      Eigen::Index off = hidden_[k - 1];
      for (const Matrix* m : {&h.u, &h.v, &h.d, &h.s, &h.t}) {
        x.segment(off, n) = m->reshaped();
        off += n;
      }
    }
    return x;
  }

  void bounds(Vector& lower, Vector& upper) const {
    lower = Vector::Constant(size_, -kUnbounded);
    upper = Vector::Constant(size_, kUnbounded);
    for (int k = 1; k < L_; ++k) {
      const Eigen::Index n = dims_[k - 1] * N_;
      const Eigen::Index d0 = hidden_[k - 1] + 2 * n;
      lower.segment(d0, 3 * n).setZero();
      upper.segment(d0, n).setOnes();
    }
  }

 private:
  int L_;
  Eigen::Index N_;
  Eigen::Index size_ = 0;
  std::vector<Eigen::Index> W_, b_, hidden_;
  std::vector<int> dims_;
};

using SparseGrad = std::vector<std::pair<Eigen::Index, double>>;

// weight * grad grad^T for one residual.
void add_outer(std::vector<Triplet>& out, const SparseGrad& grad, double weight) {
  for (const auto& [i, gi] : grad)
    for (const auto& [j, gj] : grad) out.emplace_back(i, j, weight * gi * gj);
}

void add_cross(std::vector<Triplet>& out, Eigen::Index i, Eigen::Index j, double value) {
  out.emplace_back(i, j, value);
  out.emplace_back(j, i, value);
}

// Exact Hessian of the augmented Lagrangian. Each residual r with weight rho
// and multiplier mu contributes rho grad r grad r^T + (rho r + mu) hess r,
// where hess r only has the bilinear cross terms.
SparseMatrix hessian(const Layout& lay, const NetworkParams& net, const SampleState& state,
                     const DualState& duals, const PenaltyParams& pen, const TrainingData& data) {
  const int L = net.num_layers();
  const Eigen::Index N = data.size();
  std::vector<Triplet> trip;
  SparseGrad grad;

  for (int l = 1; l <= L; ++l) {
    const Eigen::Index rows = net.W(l).rows();
    for (Eigen::Index c = 0; c < net.W(l).cols(); ++c)
      for (Eigen::Index r = 0; r < rows; ++r)
        trip.emplace_back(lay.W(l, r, c, rows), lay.W(l, r, c, rows), pen.c1);
  }

  for (int k = 1; k < L; ++k) {
    const LayerState& ls = state.layer(k);
    const LayerDuals& mu = duals.layer(k);
    const Eigen::Index rows = net.W(k).rows();
    const Eigen::Index cols = net.W(k).cols();
    const Matrix& prev = state.v(k - 1, data.inputs);
    Matrix affine = net.W(k) * prev;
    affine.colwise() += net.b(k);
    for (Eigen::Index j = 0; j < N; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double u = ls.u(i, j), d = ls.d(i, j);
        const Eigen::Index iu = lay.hidden(k, 0, i, j), iv = lay.hidden(k, 1, i, j);
        const Eigen::Index id = lay.hidden(k, 2, i, j), is = lay.hidden(k, 3, i, j);
        const Eigen::Index it = lay.hidden(k, 4, i, j);
        const double a1 = pen.rho1 * (ls.v(i, j) - d * u) + mu.mu1(i, j);
        const double a3 = pen.rho3 * (d * u - ls.s(i, j)) + mu.mu3(i, j);
        const double a4 = pen.rho4 * ((1.0 - d) * u + ls.t(i, j)) + mu.mu4(i, j);
        add_outer(trip, {{iv, 1.0}, {id, -u}, {iu, -d}}, pen.rho1);
        add_outer(trip, {{id, u}, {iu, d}, {is, -1.0}}, pen.rho3);
        add_outer(trip, {{iu, 1.0 - d}, {id, -u}, {it, 1.0}}, pen.rho4);
        add_cross(trip, iu, id, -a1 + a3 - a4);
        trip.emplace_back(id, id, pen.c2);

        // r2 = u - W v_prev - b
        const double a2 = pen.rho2 * (u - affine(i, j)) + mu.mu2(i, j);
        grad.clear();
        grad.emplace_back(iu, 1.0);
        grad.emplace_back(lay.b(k, i), -1.0);
        for (Eigen::Index c = 0; c < cols; ++c) {
          const Eigen::Index iw = lay.W(k, i, c, rows);
          grad.emplace_back(iw, -prev(c, j));
          if (k > 1) {
            const Eigen::Index ip = lay.hidden(k - 1, 1, c, j);
            grad.emplace_back(ip, -net.W(k)(i, c));
            add_cross(trip, iw, ip, -a2);
          }
        }
        add_outer(trip, grad, pen.rho2);
      }
    }
  }

  const Eigen::Index out_rows = net.W(L).rows();
  const Matrix& last = state.v(L - 1, data.inputs);
  Matrix err = net.W(L) * last;
  err.colwise() += net.b(L);
  err -= data.targets;
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < out_rows; ++i) {
      grad.clear();
      grad.emplace_back(lay.b(L, i), 1.0);
      for (Eigen::Index c = 0; c < net.W(L).cols(); ++c) {
        const Eigen::Index iw = lay.W(L, i, c, out_rows);
        const Eigen::Index ip = lay.hidden(L - 1, 1, c, j);
        grad.emplace_back(iw, last(c, j));
        grad.emplace_back(ip, net.W(L)(i, c));
        add_cross(trip, iw, ip, err(i, j));
      }
      add_outer(trip, grad, 1.0);
    }
  }

  SparseMatrix H(lay.size(), lay.size());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

double projected_norm(const Vector& x, const Vector& g, const Vector& lo, const Vector& hi) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double p = project_bound(x(i), g(i), lo(i), hi(i));
    sum += p * p;
  }
  return std::sqrt(sum);
}

}  // namespace

InnerResult projected_newton_solve(NetworkParams& net, SampleState& state, const DualState& duals,
                                   const PenaltyParams& pen, const TrainingData& data, double omega,
                                   int max_iterations) {
  if (!(omega > 0.0)) throw std::invalid_argument("projected_newton_solve: omega must be positive");
  const Layout lay(net, data.size());
  Vector lo, hi;
  lay.bounds(lo, hi);

  NetworkParams trial_net = net;
  SampleState trial_state = state;
  auto value_at = [&](const Vector& x) {
    lay.unpack(x, trial_net, trial_state);
    return eval_auglag(trial_net, trial_state, duals, pen, data);
  };

  Vector x = lay.pack(net, state);
  double f = eval_auglag(net, state, duals, pen, data);
  Vector g = lay.pack_gradient(grad_auglag(net, state, duals, pen, data));
  InnerResult result;
  result.kkt = projected_norm(x, g, lo, hi);
  result.value = f;
  double damping = 1e-8;

  while (result.kkt > omega && result.sweeps < max_iterations) {
    ++result.sweeps;
    // Variables within eps of a bound with the gradient pushing outward are
    // held on the bound; Newton runs on the rest.
    const double eps = std::min(1e-6, result.kkt);
    std::vector<Eigen::Index> free_idx;
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(x.size()), -1);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const bool at_lo = x(i) - lo(i) <= eps && g(i) > 0.0;
      const bool at_hi = hi(i) - x(i) <= eps && g(i) < 0.0;
      if (!at_lo && !at_hi) {
        pos[i] = static_cast<Eigen::Index>(free_idx.size());
        free_idx.push_back(i);
      }
    }
    const auto nf = static_cast<Eigen::Index>(free_idx.size());

    const SparseMatrix H = hessian(lay, net, state, duals, pen, data);
    std::vector<Triplet> trip;
    for (int k = 0; k < H.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(H, k); it; ++it)
        if (pos[it.row()] >= 0 && pos[it.col()] >= 0)
          trip.emplace_back(pos[it.row()], pos[it.col()], it.value());
    SparseMatrix Hf(nf, nf);
    Hf.setFromTriplets(trip.begin(), trip.end());
    Vector gf(nf);
    for (Eigen::Index q = 0; q < nf; ++q) gf(q) = g(free_idx[q]);
    const double scale = nf > 0 ? std::max(1.0, Hf.diagonal().cwiseAbs().maxCoeff()) : 1.0;

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      SparseMatrix M = Hf;
      for (Eigen::Index q = 0; q < nf; ++q) M.coeffRef(q, q) += damping * scale;
      Eigen::SimplicialLDLT<SparseMatrix> ldlt(M);
      if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
        damping = std::max(damping * 10.0, 1e-12);
        continue;
      }
      const Vector pf = ldlt.solve(-gf);
      Vector step = -g;  // held variables move onto their bound
      for (Eigen::Index q = 0; q < nf; ++q) step(free_idx[q]) = pf(q);

      for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
        const Vector trial = (x + alpha * step).cwiseMax(lo).cwiseMin(hi);
        const double ft = value_at(trial);
        if (std::isfinite(ft) && ft <= f + 1e-4 * g.dot(trial - x)) {
          x = trial;
          f = ft;
          accepted = true;
          if (alpha == 1.0) damping = std::max(damping / 10.0, 1e-14);
          break;
        }
      }
      if (!accepted) damping *= 10.0;
    }
    if (!accepted) break;

    lay.unpack(x, net, state);
    g = lay.pack_gradient(grad_auglag(net, state, duals, pen, data));
    result.kkt = projected_norm(x, g, lo, hi);
    result.value = f;
  }
  if (!std::isfinite(result.value))
    throw DivergenceError("projected Newton produced a non-finite objective");
  result.converged = result.kkt <= omega;
  return result;
}

}  // namespace urnet
