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

#ifndef URNET_TOOLS_EXPERIMENT_H_
#define URNET_TOOLS_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "run_config.h"
#include "urnet/cgt.h"
#include "urnet/csrecovery.h"
#include "urnet/model.h"

namespace urnet::app {

// Signals as columns, values in [0, 1].
struct SignalSet {
  Matrix train;
  Matrix test;
  std::string provenance;
};

// Training and test signals for seed offset `s`. Throws DataError for
// missing or malformed files.
SignalSet load_signals(const RunConfig& config, std::uint64_t s);

// The file named by sensing_path if set, otherwise gen_sensing(m, n,
// sensing_seed + s).
SensingProblem make_sensing(const RunConfig& config, int m, std::uint64_t s);

struct TrainOutcome {
  NetworkParams net;
  std::vector<OuterTraceRow> trace;  // baselines: iter = epoch, L = objective
  std::string status = "ok";
  std::string message;
  bool diverged = false;
  std::optional<double> constraint_norm;
  std::optional<double> kkt;
  double seconds = 0.0;
};

// Trains `method` from init_gaussian(layer_dims, init_sigma, init_seed + s).
// Divergence is reported through TrainOutcome::diverged rather than thrown.
TrainOutcome train_method(const RunConfig& config, Method method, const TrainingData& data,
                          std::uint64_t s);

struct Metrics {
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;  // NaN unless the signal length is a perfect square
};

// Per-sample metrics with peak 1. Square-length signals are reshaped
// row-major into side x side images for SSIM.
Metrics signal_metrics(const Vector& x, const Vector& x_hat);

// Means of signal_metrics over the columns. PSNR is averaged over samples
// with a finite value.
Metrics mean_metrics(const Matrix& X, const Matrix& X_hat);

// One-line-per-epoch baseline trace in the outer-trace row type.
std::vector<OuterTraceRow> objective_trace(const std::vector<double>& objective);

struct BenchCell {
  std::string method;
  int m = 0;
  int n = 0;
  bool ok = true;
  std::string error;
  Metrics metrics;
  double seconds = 0.0;
};

// Every method x m cell averaged over config.seeds, run on `workers`
// threads. Output order is independent of scheduling.
std::vector<BenchCell> run_bench(const RunConfig& config, int workers);

// Columns: method,m,n,ratio,seeds,mse,psnr,ssim,status,error
void write_bench_csv(const std::string& path, const std::vector<BenchCell>& cells,
                     std::size_t num_seeds);

// Methods as rows, CS ratios as columns, one block per metric.
void write_bench_table(const std::string& path, const std::vector<BenchCell>& cells);

}  // namespace urnet::app

#endif  // URNET_TOOLS_EXPERIMENT_H_
