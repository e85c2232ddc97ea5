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

#ifndef URNET_CGT_H_
#define URNET_CGT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "urnet/primal.h"

namespace urnet {

// Penalty scale and tolerances carried between outer iterations. The
// effective penalties are PenaltyParams::scaled(rho_scale).
struct ScheduleState {
  double rho_scale = 1.0;
  double omega = 1.0;
  double eta = 1.0;
};

enum class InnerMethod {
  kSweeps,            // block sweeps only
  kSweepsThenNewton,  // block sweeps, then projected Newton if still above omega
};

struct CgtOptions {
  double rho_scale0 = 1.0;
  double omega0 = 1.0;
  double eta0 = 1.0;
  double tau = 0.01;
  double omega_star = 1e-4;
  double eta_star = 1e-4;
  int max_outer = 200;
  int max_inner_sweeps = 1000;
  int kkt_interval = 1;  // sweeps between KKT checks inside an inner solve
  InnerMethod inner_method = InnerMethod::kSweeps;
  int max_newton_iterations = 200;
  VMode v_mode = VMode::kFree;
  // 0 runs full batch. Otherwise per-sample blocks and weight reductions are
  // swept one shuffled mini-batch at a time inside each inner solve.
  // Experimental: the convergence theory assumes the full batch.
  int minibatch_size = 0;
  std::uint64_t shuffle_seed = 0;
  bool record_sweeps = true;
};

// Tolerance/penalty recurrence after an outer iteration.
//   feasible (||c|| <= eta):   keep rho; beta = min(1/rho, 0.1);
//                              omega *= beta; eta *= beta^0.9
//   infeasible:                1/rho *= tau; beta = min(1/rho, 0.1);
//                              omega = omega0 * beta; eta = eta0 * beta^0.1
ScheduleState advance_schedule(const ScheduleState& current, bool feasible,
                               const CgtOptions& options);

struct OuterTraceRow {
  int iter = 0;
  double lagrangian = 0.0;  // augmented Lagrangian at the end of the inner solve
  double loss = 0.0;
  double constraint_norm = 0.0;
  double kkt = 0.0;
  double rho_scale = 0.0;  // in effect during this iteration
  double omega = 0.0;
  double eta = 0.0;
  int sweeps = 0;
  int newton_iterations = 0;
  bool inner_converged = false;
  bool feasible = false;  // took the dual-update branch
};

struct SweepTraceRow {
  int iter = 0;
  int sweep = 0;
  double lagrangian = 0.0;
  double kkt = 0.0;
};

enum class CgtStatus { kConverged, kMaxIterations, kDiverged };

struct CgtResult {
  NetworkParams net;
  SampleState state;
  DualState duals;
  CgtStatus status = CgtStatus::kMaxIterations;
  std::string message;
  std::vector<OuterTraceRow> trace;
  std::vector<SweepTraceRow> sweep_trace;
};

// Signature of a pluggable inner solver; the default is inner_solve.
using InnerSolver = std::function<InnerResult(NetworkParams&, SampleState&, const DualState&,
                                              const PenaltyParams&, const TrainingData&,
                                              double omega)>;

// Outer augmented-Lagrangian loop over the un-rectified problem. Starts from
// the exactly feasible lifting of `net0` with zero multipliers.
CgtResult cgt_train(const NetworkParams& net0, const TrainingData& data,
                    const PenaltyParams& base_penalties, const CgtOptions& options = {},
                    InnerSolver inner = {});

const char* to_string(CgtStatus status);

// Columns: iter,L,loss,constraint_norm,kkt,rho_scale,omega,eta
void write_trace_csv(std::ostream& out, const std::vector<OuterTraceRow>& trace);
void write_trace_csv(const std::filesystem::path& path, const std::vector<OuterTraceRow>& trace);

}  // namespace urnet

#endif  // URNET_CGT_H_
