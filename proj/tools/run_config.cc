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

#include "run_config.h"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace urnet::app {
namespace {

using nlohmann::json;

const char* inner_method_name(InnerMethod m) {
  return m == InnerMethod::kSweeps ? "sweeps" : "sweeps+newton";
}

InnerMethod parse_inner_method(const std::string& name) {
  if (name == "sweeps") return InnerMethod::kSweeps;
  if (name == "sweeps+newton") return InnerMethod::kSweepsThenNewton;
  throw ConfigError("inner_method must be 'sweeps' or 'sweeps+newton', got '" + name + "'");
}

template <typename T>
T get_key(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type: " +
                      j.at(key).dump());
  }
}

// Integers must be JSON integers; reals accept either.
bool compatible(const json& expected, const json& given) {
  if (expected.is_number_unsigned()) return given.is_number_unsigned();
  if (expected.is_number_integer()) return given.is_number_integer();
  if (expected.is_number()) return given.is_number();
  if (expected.is_array()) return given.is_array();
  return expected.type() == given.type();
}

RunConfig from_full_json(const json& j) {
  RunConfig c;
  c.method = parse_method(get_key<std::string>(j, "method"));
  c.layer_dims = get_key<std::vector<int>>(j, "layer_dims");
  c.init_sigma = get_key<double>(j, "init_sigma");
  c.seed = get_key<std::uint64_t>(j, "seed");
  c.seeds = get_key<std::vector<std::uint64_t>>(j, "seeds");
  c.data_seed = get_key<std::uint64_t>(j, "data_seed");
  c.test_seed = get_key<std::uint64_t>(j, "test_seed");
  c.sensing_seed = get_key<std::uint64_t>(j, "sensing_seed");
  c.init_seed = get_key<std::uint64_t>(j, "init_seed");
  c.penalties.rho1 = get_key<double>(j, "rho1");
  c.penalties.rho2 = get_key<double>(j, "rho2");
  c.penalties.rho3 = get_key<double>(j, "rho3");
  c.penalties.rho4 = get_key<double>(j, "rho4");
  c.penalties.c1 = get_key<double>(j, "c1");
  c.penalties.c2 = get_key<double>(j, "c2");
  c.tau = get_key<double>(j, "tau");
  c.omega0 = get_key<double>(j, "omega0");
  c.eta0 = get_key<double>(j, "eta0");
  c.omega_star = get_key<double>(j, "omega_star");
  c.eta_star = get_key<double>(j, "eta_star");
  c.max_outer = get_key<int>(j, "max_outer");
  c.max_inner_sweeps = get_key<int>(j, "max_inner_sweeps");
  c.kkt_interval = get_key<int>(j, "kkt_interval");
  c.inner_method = parse_inner_method(get_key<std::string>(j, "inner_method"));
  c.max_newton_iterations = get_key<int>(j, "max_newton_iterations");
  c.minibatch = get_key<int>(j, "minibatch");
  c.adam_lr = get_key<double>(j, "adam_lr");
  c.adam_epochs = get_key<int>(j, "adam_epochs");
  c.adam_batch = get_key<int>(j, "adam_batch");
  c.bcd_gamma = get_key<double>(j, "bcd_gamma");
  c.bcd_epochs = get_key<int>(j, "bcd_epochs");
  c.dataset = get_key<std::string>(j, "dataset");
  c.sparse_n = get_key<int>(j, "sparse_n");
  c.sparse_k = get_key<int>(j, "sparse_k");
  c.train_count = get_key<int>(j, "train_count");
  c.test_count = get_key<int>(j, "test_count");
  c.mnist_images = get_key<std::string>(j, "mnist_images");
  c.mnist_labels = get_key<std::string>(j, "mnist_labels");
  c.mnist_test_images = get_key<std::string>(j, "mnist_test_images");
  c.mnist_test_labels = get_key<std::string>(j, "mnist_test_labels");
  c.train_images = get_key<std::vector<std::string>>(j, "train_images");
  c.test_images = get_key<std::vector<std::string>>(j, "test_images");
  c.patch_size = get_key<int>(j, "patch_size");
  c.patch_stride = get_key<int>(j, "patch_stride");
  c.sensing_m = get_key<int>(j, "sensing_m");
  c.sensing_path = get_key<std::string>(j, "sensing_path");
  c.bench_methods = get_key<std::vector<std::string>>(j, "bench_methods");
  c.bench_m = get_key<std::vector<int>>(j, "bench_m");
  c.output_dir = get_key<std::string>(j, "output_dir");
  return c;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::kUnrectify: return "unrectify";
    case Method::kAdam: return "adam";
    case Method::kBcd: return "bcd";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "unrectify") return Method::kUnrectify;
  if (name == "adam") return Method::kAdam;
  if (name == "bcd") return Method::kBcd;
  throw ConfigError("unknown method '" + name + "' (expected unrectify, adam or bcd)");
}

int RunConfig::signal_dim() const {
  if (dataset == "sparse") return sparse_n;
  if (dataset == "mnist") return 784;
  return patch_size * patch_size;
}

void RunConfig::validate() const {
  require(layer_dims.size() >= 2, "layer_dims needs at least an input and an output size");
  for (int d : layer_dims) require(d > 0, "layer_dims entries must be positive");
  require(std::isfinite(init_sigma) && init_sigma > 0.0, "init_sigma must be positive");
  require(!seeds.empty(), "seeds must not be empty");
  try {
    penalties.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  require(omega0 > 0.0 && eta0 > 0.0, "omega0 and eta0 must be positive");
  require(omega_star > 0.0 && eta_star > 0.0, "omega_star and eta_star must be positive");
  require(max_outer > 0, "max_outer must be positive");
  require(max_inner_sweeps > 0, "max_inner_sweeps must be positive");
  require(kkt_interval > 0, "kkt_interval must be positive");
  require(max_newton_iterations >= 0, "max_newton_iterations must be >= 0");
  require(minibatch >= 0, "minibatch must be >= 0");
  require(adam_lr > 0.0, "adam_lr must be positive");
  require(adam_epochs > 0 && bcd_epochs > 0, "epoch counts must be positive");
  require(adam_batch >= 0, "adam_batch must be >= 0");
  require(bcd_gamma > 0.0, "bcd_gamma must be positive");

  if (dataset == "sparse") {
    require(sparse_n > 0 && sparse_k > 0 && sparse_k <= sparse_n, "need 0 < sparse_k <= sparse_n");
    require(train_count > 0 && test_count > 0, "train_count and test_count must be positive");
  } else if (dataset == "mnist") {
    require(!mnist_images.empty() && !mnist_labels.empty(),
            "dataset 'mnist' needs mnist_images and mnist_labels");
    require(!mnist_test_images.empty() && !mnist_test_labels.empty(),
            "dataset 'mnist' needs mnist_test_images and mnist_test_labels");
    require(train_count > 0 && test_count > 0, "train_count and test_count must be positive");
  } else if (dataset == "images") {
    require(!train_images.empty() && !test_images.empty(),
            "dataset 'images' needs train_images and test_images");
    require(patch_size > 0 && patch_stride > 0, "patch_size and patch_stride must be positive");
  } else {
    throw ConfigError("dataset must be 'sparse', 'mnist' or 'images', got '" + dataset + "'");
  }

  const int n = signal_dim();
  require(layer_dims.front() == n && layer_dims.back() == n,
          "layer_dims must start and end with the signal dimension " + std::to_string(n));
  if (sensing_path.empty()) require(sensing_m > 0 && sensing_m < n, "need 0 < sensing_m < n");
  for (const auto& m : bench_methods) parse_method(m);
  require(!output_dir.empty(), "output_dir must not be empty");
}

void RunConfig::validate_bench() const {
  validate();
  require(!bench_methods.empty(), "bench_methods must not be empty");
  require(!bench_m.empty(), "bench_m must not be empty");
  const int n = signal_dim();
  for (int m : bench_m) require(m > 0 && m < n, "bench_m entries must lie in (0, n)");
}

CgtOptions RunConfig::cgt_options() const {
  CgtOptions o;
  o.tau = tau;
  o.omega0 = omega0;
  o.eta0 = eta0;
  o.omega_star = omega_star;
  o.eta_star = eta_star;
  o.max_outer = max_outer;
  o.max_inner_sweeps = max_inner_sweeps;
  o.kkt_interval = kkt_interval;
  o.inner_method = inner_method;
  o.max_newton_iterations = max_newton_iterations;
  o.minibatch_size = minibatch;
  o.record_sweeps = false;
  return o;
}

AdamConfig RunConfig::adam_config(std::uint64_t shuffle_seed) const {
  AdamConfig a;
  a.learning_rate = adam_lr;
  a.epochs = adam_epochs;
  a.batch_size = adam_batch;
  a.c1 = penalties.c1;
  a.shuffle_seed = shuffle_seed;
  return a;
}

BcdConfig RunConfig::bcd_config() const {
  BcdConfig b;
  b.gamma = bcd_gamma;
  b.epochs = bcd_epochs;
  b.c1 = penalties.c1;
  return b;
}

json to_json(const RunConfig& c) {
  return json{
      {"method", to_string(c.method)},
      {"layer_dims", c.layer_dims},
      {"init_sigma", c.init_sigma},
      {"seed", c.seed},
      {"seeds", c.seeds},
      {"data_seed", c.data_seed},
      {"test_seed", c.test_seed},
      {"sensing_seed", c.sensing_seed},
      {"init_seed", c.init_seed},
      {"rho1", c.penalties.rho1},
      {"rho2", c.penalties.rho2},
      {"rho3", c.penalties.rho3},
      {"rho4", c.penalties.rho4},
      {"c1", c.penalties.c1},
      {"c2", c.penalties.c2},
      {"tau", c.tau},
      {"omega0", c.omega0},
      {"eta0", c.eta0},
      {"omega_star", c.omega_star},
      {"eta_star", c.eta_star},
      {"max_outer", c.max_outer},
      {"max_inner_sweeps", c.max_inner_sweeps},
      {"kkt_interval", c.kkt_interval},
      {"inner_method", inner_method_name(c.inner_method)},
      {"max_newton_iterations", c.max_newton_iterations},
      {"minibatch", c.minibatch},
      {"adam_lr", c.adam_lr},
      {"adam_epochs", c.adam_epochs},
      {"adam_batch", c.adam_batch},
      {"bcd_gamma", c.bcd_gamma},
      {"bcd_epochs", c.bcd_epochs},
      {"dataset", c.dataset},
      {"sparse_n", c.sparse_n},
      {"sparse_k", c.sparse_k},
      {"train_count", c.train_count},
      {"test_count", c.test_count},
      {"mnist_images", c.mnist_images},
      {"mnist_labels", c.mnist_labels},
      {"mnist_test_images", c.mnist_test_images},
      {"mnist_test_labels", c.mnist_test_labels},
      {"train_images", c.train_images},
      {"test_images", c.test_images},
      {"patch_size", c.patch_size},
      {"patch_stride", c.patch_stride},
      {"sensing_m", c.sensing_m},
      {"sensing_path", c.sensing_path},
      {"bench_methods", c.bench_methods},
      {"bench_m", c.bench_m},
      {"output_dir", c.output_dir},
  };
}

RunConfig apply_json(RunConfig base, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  json merged = to_json(base);
  for (const auto& [key, value] : j.items()) {
    auto it = merged.find(key);
    if (it == merged.end()) throw ConfigError("unknown config key '" + key + "'");
    if (!compatible(*it, value))
      throw ConfigError("config key '" + key + "' has the wrong type: " + value.dump());
    *it = value;
  }
  return from_full_json(merged);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return apply_json(RunConfig{}, j);
}

RunConfig apply_override(RunConfig base, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  return apply_json(std::move(base), json{{key, value}});
}

std::string config_hash(const RunConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace urnet::app
