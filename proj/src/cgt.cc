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

#include "urnet/cgt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

namespace urnet {
namespace {

std::vector<std::vector<Eigen::Index>> make_batches(Eigen::Index n, int batch_size,
                                                    std::mt19937_64& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Eigen::Index>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

}  // namespace

ScheduleState advance_schedule(const ScheduleState& current, bool feasible,
                               const CgtOptions& options) {
  ScheduleState next = current;
  if (feasible) {
    const double beta = std::min(1.0 / next.rho_scale, 0.1);
    next.omega = current.omega * beta;
    next.eta = current.eta * std::pow(beta, 0.9);
  } else {
    const double inv_rho = options.tau / current.rho_scale;
    next.rho_scale = 1.0 / inv_rho;
    const double beta = std::min(inv_rho, 0.1);
    next.omega = options.omega0 * beta;
    next.eta = options.eta0 * std::pow(beta, 0.1);
  }
  return next;
}

const char* to_string(CgtStatus status) {
  switch (status) {
    case CgtStatus::kConverged: return "converged";
    case CgtStatus::kMaxIterations: return "max_iterations";
    case CgtStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

CgtResult cgt_train(const NetworkParams& net0, const TrainingData& data,
                    const PenaltyParams& base_penalties, const CgtOptions& options,
                    InnerSolver inner) {
  validate(net0);
  base_penalties.validate();
  if (data.size() < 1) throw std::invalid_argument("cgt_train: empty training data");
  if (data.inputs.rows() != net0.input_dim() || data.targets.rows() != net0.output_dim() ||
      data.targets.cols() != data.size())
    throw DimensionError("cgt_train: data does not match network");

  CgtResult result;
  result.net = net0;
  result.state = unrectify_forward(net0, data.inputs);
  result.duals = DualState::zeros(net0, data.size());

  std::mt19937_64 rng(options.shuffle_seed);
  ScheduleState schedule{options.rho_scale0, options.omega0, options.eta0};
  int outer_iter = 0;

  auto polish = [&](NetworkParams& net, SampleState& state, const DualState& duals,
                    const PenaltyParams& pen, const TrainingData& d, double omega,
                    InnerResult r) {
    if (r.converged || options.inner_method != InnerMethod::kSweepsThenNewton) return r;
    const InnerResult n =
        projected_newton_solve(net, state, duals, pen, d, omega, options.max_newton_iterations);
    r.kkt = n.kkt;
    r.value = n.value;
    r.converged = n.converged;
    r.newton_iterations = n.sweeps;
    return r;
  };

  if (!inner) {
    inner = [&](NetworkParams& net, SampleState& state, const DualState& duals,
                const PenaltyParams& pen, const TrainingData& d, double omega) {
      SweepOptions sweep_options;
      sweep_options.v_mode = options.v_mode;
      sweep_options.kkt_interval = options.kkt_interval;
      if (options.record_sweeps) {
        sweep_options.on_sweep = [&](int sweep, double value, double kkt) {
          result.sweep_trace.push_back({outer_iter, sweep, value, kkt});
        };
      }
      InnerResult r;
      if (options.minibatch_size <= 0 || options.minibatch_size >= d.size()) {
        r = inner_solve(net, state, duals, pen, d, omega, options.max_inner_sweeps, sweep_options);
        return polish(net, state, duals, pen, d, omega, r);
      }
      while (r.sweeps < options.max_inner_sweeps) {
        r.value = inner_sweep_batched(net, state, duals, pen, d,
                                      make_batches(d.size(), options.minibatch_size, rng),
                                      sweep_options);
        ++r.sweeps;
        if (!std::isfinite(r.value)) throw DivergenceError("mini-batch sweep diverged");
        if (r.sweeps % std::max(1, options.kkt_interval) != 0 && r.sweeps < options.max_inner_sweeps)
          continue;
        r.kkt = kkt_residual(net, state, duals, pen, d);
        if (sweep_options.on_sweep) sweep_options.on_sweep(r.sweeps - 1, r.value, r.kkt);
        if (r.kkt <= omega) {
          r.converged = true;
          break;
        }
      }
      return polish(net, state, duals, pen, d, omega, r);
    };
  }

  for (outer_iter = 0; outer_iter < options.max_outer; ++outer_iter) {
    const PenaltyParams pen = base_penalties.scaled(schedule.rho_scale);
    InnerResult inner_result;
    try {
      inner_result = inner(result.net, result.state, result.duals, pen, data, schedule.omega);
    } catch (const DivergenceError& e) {
      result.status = CgtStatus::kDiverged;
      result.message = e.what();
      return result;
    }

    const AuglagTerms terms = eval_auglag_terms(result.net, result.state, result.duals, pen, data);
    const double cnorm = residuals(result.net, data.inputs, result.state).norm();
    OuterTraceRow row;
    row.iter = outer_iter;
    row.lagrangian = terms.total();
    row.loss = terms.loss;
    row.constraint_norm = cnorm;
    row.kkt = inner_result.kkt;
    row.rho_scale = schedule.rho_scale;
    row.omega = schedule.omega;
    row.eta = schedule.eta;
    row.sweeps = inner_result.sweeps;
    row.newton_iterations = inner_result.newton_iterations;
    row.inner_converged = inner_result.converged;
    row.feasible = cnorm <= schedule.eta;
    result.trace.push_back(row);

    if (!std::isfinite(row.lagrangian)) {
      result.status = CgtStatus::kDiverged;
      result.message = "non-finite augmented Lagrangian at outer iteration " +
                       std::to_string(outer_iter);
      return result;
    }

    if (row.feasible) {
      if (inner_result.kkt <= options.omega_star && cnorm <= options.eta_star) {
        result.status = CgtStatus::kConverged;
        return result;
      }
      result.duals = dual_update(result.duals, result.state, result.net, pen, data.inputs);
    }
    schedule = advance_schedule(schedule, row.feasible, options);
  }
  result.status = CgtStatus::kMaxIterations;
  return result;
}

void write_trace_csv(std::ostream& out, const std::vector<OuterTraceRow>& trace) {
  out << "iter,L,loss,constraint_norm,kkt,rho_scale,omega,eta\n";
  out << std::setprecision(17);
  for (const OuterTraceRow& r : trace) {
    out << r.iter << ',' << r.lagrangian << ',' << r.loss << ',' << r.constraint_norm << ','
        << r.kkt << ',' << r.rho_scale << ',' << r.omega << ',' << r.eta << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<OuterTraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_trace_csv(out, trace);
}

}  // namespace urnet
