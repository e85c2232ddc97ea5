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

#ifndef URNET_TESTS_BLOCK_ORACLES_H_
#define URNET_TESTS_BLOCK_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "test_util.h"
#include "urnet/primal.h"

namespace urnet::testing {

// The terms of the augmented Lagrangian that involve one (d, s, t) entry,
// written out from the residual definitions.
struct UnitTerms {
  double u, v, d, s, t;
  double mu1, mu3, mu4;
  double rho1, rho3, rho4, c2;

  double f_d(double dd) const {
    const double r1 = v - dd * u, r3 = dd * u - s, r4 = (1 - dd) * u + t;
    return 0.5 * rho1 * r1 * r1 + mu1 * r1 + 0.5 * rho3 * r3 * r3 + mu3 * r3 +
           0.5 * rho4 * r4 * r4 + mu4 * r4 + 0.5 * c2 * dd * dd;
  }
  double f_s(double ss) const {
    const double r3 = d * u - ss;
    return 0.5 * rho3 * r3 * r3 + mu3 * r3;
  }
  double f_t(double tt) const {
    const double r4 = (1 - d) * u + tt;
    return 0.5 * rho4 * r4 * r4 + mu4 * r4;
  }
};

inline UnitTerms unit_terms(const SampleState& st, const DualState& du, const PenaltyParams& p,
                            int k, Eigen::Index i, Eigen::Index j) {
  const LayerState& l = st.layer(k);
  const LayerDuals& m = du.layer(k);
  return {l.u(i, j),  l.v(i, j),  l.d(i, j),  l.s(i, j), l.t(i, j), m.mu1(i, j),
          m.mu3(i, j), m.mu4(i, j), p.rho1, p.rho3, p.rho4, p.c2};
}

// Minimum of f over `points` equispaced points of [lo, hi].
template <typename F>
double grid_min(F&& f, double lo, double hi, int points = 10000) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) best = std::min(best, f(lo + (hi - lo) * i / (points - 1)));
  return best;
}

struct ExactnessReport {
  double max_gradient = 0.0;  // unconstrained blocks, at the update result
  double max_grid_gap = -std::numeric_limits<double>::infinity();  // f(result) - grid min
  bool bounds_ok = true;
};

// Applies every block update of one sweep in order. Before each update is
// installed its result is checked: zero block gradient for W, b, u, v and a
// scalar grid search for each entry of d, s, t.
inline ExactnessReport check_block_exactness(NetworkParams net, SampleState st, const DualState& du,
                                             const PenaltyParams& pen, const TrainingData& data) {
  ExactnessReport rep;
  for (const BlockId& b : sweep_order(net.num_layers())) {
    NetworkParams trial_net = net;
    SampleState trial = st;
    apply_block_update(b, trial_net, trial, du, pen, data, VMode::kFree);
    switch (b.kind) {
      case BlockKind::W:
      case BlockKind::b:
      case BlockKind::u:
      case BlockKind::v: {
        const Matrix g = grad_auglag_block(b, trial_net, trial, du, pen, data);
        rep.max_gradient = std::max(rep.max_gradient, g.norm());
        break;
      }
      case BlockKind::d:
      case BlockKind::s:
      case BlockKind::t: {
        const LayerState& l = trial.layer(b.layer);
        for (Eigen::Index j = 0; j < l.u.cols(); ++j) {
          for (Eigen::Index i = 0; i < l.u.rows(); ++i) {
            // Terms evaluated at the pre-update point; only the block entry varies.
            const UnitTerms ut = unit_terms(st, du, pen, b.layer, i, j);
            double gap = 0.0;
            if (b.kind == BlockKind::d) {
              const double x = l.d(i, j);
              rep.bounds_ok &= x >= 0.0 && x <= 1.0;
              gap = ut.f_d(x) - grid_min([&](double z) { return ut.f_d(z); }, 0.0, 1.0);
            } else if (b.kind == BlockKind::s) {
              const double x = l.s(i, j);
              rep.bounds_ok &= x >= 0.0;
              const double hi = std::max({1.0, 2 * (ut.d * ut.u + ut.mu3 / ut.rho3), 2 * x});
              gap = ut.f_s(x) - grid_min([&](double z) { return ut.f_s(z); }, 0.0, hi);
            } else {
              const double x = l.t(i, j);
              rep.bounds_ok &= x >= 0.0;
              const double hi =
                  std::max({1.0, 2 * (-(1 - ut.d) * ut.u - ut.mu4 / ut.rho4), 2 * x});
              gap = ut.f_t(x) - grid_min([&](double z) { return ut.f_t(z); }, 0.0, hi);
            }
            rep.max_grid_gap = std::max(rep.max_grid_gap, gap);
          }
        }
        break;
      }
    }
    net = std::move(trial_net);
    st = std::move(trial);
  }
  return rep;
}

struct TinyProblem {
  NetworkParams net;
  SampleState state;
  DualState duals;
  PenaltyParams pen;
  TrainingData data;
};

// L in {2, 3}, N <= max_samples, widths <= max_width, random duals and
// penalties around the defaults.
inline TinyProblem random_tiny_problem(std::mt19937_64& rng, int max_width = 8,
                                       int max_samples = 10) {
  TinyProblem p;
  const auto dims = random_dims(rng, max_width);
  std::uniform_int_distribution<int> count(1, max_samples);
  const Eigen::Index n = count(rng);
  p.net = random_net(dims, rng);
  p.state = random_state(dims, n, rng);
  p.duals = random_duals(dims, n, rng);
  std::uniform_real_distribution<double> r(0.5, 2.0);
  p.pen = {r(rng), r(rng), 100 * r(rng), 100 * r(rng), 1e-3 * r(rng), 1e-6 * r(rng)};
  p.data = random_data(dims, n, rng);
  return p;
}

}  // namespace urnet::testing

#endif  // URNET_TESTS_BLOCK_ORACLES_H_
