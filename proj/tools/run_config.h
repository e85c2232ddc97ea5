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

#ifndef URNET_TOOLS_RUN_CONFIG_H_
#define URNET_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "urnet/auglag.h"
#include "urnet/baselines.h"
#include "urnet/cgt.h"

namespace urnet::app {

enum class Method { kUnrectify, kAdam, kBcd };

const char* to_string(Method method);
Method parse_method(const std::string& name);

// Flat run configuration. Every key of to_json() is accepted by from_json();
// anything else is rejected. See README for the key reference.
struct RunConfig {
  Method method = Method::kUnrectify;
  std::vector<int> layer_dims = {32, 64, 64, 32};
  double init_sigma = 0.05;

  // Per-seed streams. Run s uses data_seed + s for training signals,
  // test_seed + s for test signals, sensing_seed + s for A, init_seed + s
  // for the initial weights.
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::uint64_t data_seed = 1000;
  std::uint64_t test_seed = 2000;
  std::uint64_t sensing_seed = 3000;
  std::uint64_t init_seed = 4000;

  PenaltyParams penalties{1.0, 1.0, 100.0, 100.0, 0.1, 1e-6};

  // Outer schedule and inner solver of the un-rectified trainer.
  double tau = 0.01;
  double omega0 = 1.0;
  double eta0 = 1.0;
  double omega_star = 1e-4;
  double eta_star = 1e-4;
  int max_outer = 3;
  int max_inner_sweeps = 6000;
  int kkt_interval = 100;
  InnerMethod inner_method = InnerMethod::kSweeps;
  int max_newton_iterations = 200;
  int minibatch = 0;  // 0: full batch

  // Comparators.
  double adam_lr = 1e-3;
  int adam_epochs = 2000;
  int adam_batch = 50;
  double bcd_gamma = 1.0;
  int bcd_epochs = 200;

  // Data: "sparse", "mnist" or "images".
  std::string dataset = "sparse";
  int sparse_n = 32;
  int sparse_k = 4;
  int train_count = 500;
  int test_count = 200;
  std::string mnist_images;
  std::string mnist_labels;
  std::string mnist_test_images;
  std::string mnist_test_labels;
  std::vector<std::string> train_images;
  std::vector<std::string> test_images;
  int patch_size = 32;
  int patch_stride = 4;

  // Sensing: either generated with m rows or loaded from a file.
  int sensing_m = 16;
  std::string sensing_path;

  // Bench grid.
  std::vector<std::string> bench_methods = {"unrectify", "adam", "bcd"};
  std::vector<int> bench_m = {4, 8, 16, 24};

  std::string output_dir = "runs";

  // Signal dimension implied by the dataset settings.
  int signal_dim() const;

  // Throws ConfigError on the first violated invariant.
  void validate() const;
  // validate() plus the bench grid keys.
  void validate_bench() const;

  PenaltyParams penalty_params() const { return penalties; }
  CgtOptions cgt_options() const;
  AdamConfig adam_config(std::uint64_t shuffle_seed) const;
  BcdConfig bcd_config() const;
};

nlohmann::json to_json(const RunConfig& config);

// Overlays the keys of `j` onto `base`. Unknown keys and ill-typed values
// throw ConfigError.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);

RunConfig load_config(const std::filesystem::path& path);

// "key=value" with value parsed as JSON when possible, else as a string.
RunConfig apply_override(RunConfig base, const std::string& assignment);

// Lower-case hex FNV-1a 64 of the canonical JSON dump.
std::string config_hash(const RunConfig& config);

}  // namespace urnet::app

#endif  // URNET_TOOLS_RUN_CONFIG_H_
