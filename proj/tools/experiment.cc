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

#include "experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string_view>
#include <thread>

#include "urnet/baselines.h"
#include "urnet/datasets.h"

namespace urnet::app {
namespace {

Matrix first_columns(const Matrix& m, int count) {
  return m.leftCols(std::min<Eigen::Index>(count, m.cols()));
}

Matrix patches_of(const std::vector<std::string>& paths, int size, int stride) {
  std::vector<Matrix> blocks;
  Eigen::Index total = 0;
  for (const auto& p : paths) {
    const Matrix image = load_grayscale_image(p);
    if (image.rows() < size || image.cols() < size)
      throw DataError(p + " is smaller than the " + std::to_string(size) + "-pixel patch");
    blocks.push_back(extract_patches(image, size, stride));
    total += blocks.back().cols();
  }
  Matrix out(static_cast<Eigen::Index>(size) * size, total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

BenchCell run_cell(const RunConfig& config, const std::vector<SignalSet>& signals,
                   Method method, int m) {
  BenchCell cell;
  cell.method = to_string(method);
  cell.m = m;
  cell.n = config.signal_dim();
  const auto start = std::chrono::steady_clock::now();
  try {
    Metrics sum;
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      const std::uint64_t s = config.seeds[i];
      const SensingProblem sensing = make_sensing(config, m, s);
      const TrainingData data = build_training(signals[i].train, sensing);
      TrainOutcome out = train_method(config, method, data, s);
      if (out.diverged) throw DivergenceError(out.message);
      const Matrix X_hat = recover(out.net, sensing, Matrix(sensing.A * signals[i].test));
      const Metrics mt = mean_metrics(signals[i].test, X_hat);
      sum.mse += mt.mse;
      sum.psnr += mt.psnr;
      sum.ssim += mt.ssim;
    }
    const double k = static_cast<double>(config.seeds.size());
    cell.metrics = {sum.mse / k, sum.psnr / k, sum.ssim / k};
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cell.metrics = {nan, nan, nan};
  }
  cell.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

}  // namespace

SignalSet load_signals(const RunConfig& config, std::uint64_t s) {
  SignalSet out;
  if (config.dataset == "sparse") {
    const Dataset train = gen_sparse(config.sparse_n, config.sparse_k, config.train_count,
                                     config.data_seed + s);
    const Dataset test = gen_sparse(config.sparse_n, config.sparse_k, config.test_count,
                                    config.test_seed + s);
    out.train = train.samples;
    out.test = test.samples;
    out.provenance = train.provenance + ";" + test.provenance;
  } else if (config.dataset == "mnist") {
    const Dataset train = load_mnist_idx(config.mnist_images, config.mnist_labels);
    const Dataset test = load_mnist_idx(config.mnist_test_images, config.mnist_test_labels);
    out.train = first_columns(train.samples, config.train_count);
    out.test = first_columns(test.samples, config.test_count);
    out.provenance = train.provenance + ";" + test.provenance;
  } else {
    out.train = first_columns(
        patches_of(config.train_images, config.patch_size, config.patch_stride),
        config.train_count);
    out.test = first_columns(
        patches_of(config.test_images, config.patch_size, config.patch_stride),
        config.test_count);
    out.provenance = "images";
  }
  if (out.train.rows() != config.signal_dim())
    throw DataError("signals have dimension " + std::to_string(out.train.rows()) +
                    ", expected " + std::to_string(config.signal_dim()));
  return out;
}

SensingProblem make_sensing(const RunConfig& config, int m, std::uint64_t s) {
  if (!config.sensing_path.empty()) {
    SensingProblem p = load_sensing(config.sensing_path);
    if (p.n != config.signal_dim())
      throw DataError("sensing matrix has n = " + std::to_string(p.n) + ", expected " +
                      std::to_string(config.signal_dim()));
    return p;
  }
  return gen_sensing(m, config.signal_dim(), config.sensing_seed + s);
}

TrainOutcome train_method(const RunConfig& config, Method method, const TrainingData& data,
                          std::uint64_t s) {
  TrainOutcome out;
  const NetworkParams net0 = init_gaussian(config.layer_dims, config.init_sigma,
                                           config.init_seed + s);
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (method) {
      case Method::kUnrectify: {
        CgtResult r = cgt_train(net0, data, config.penalty_params(), config.cgt_options());
        out.net = std::move(r.net);
        out.trace = std::move(r.trace);
        out.status = to_string(r.status);
        out.message = r.message;
        out.diverged = r.status == CgtStatus::kDiverged;
        if (!out.trace.empty()) {
          out.constraint_norm = out.trace.back().constraint_norm;
          out.kkt = out.trace.back().kkt;
        }
        break;
      }
      case Method::kAdam: {
        TrainResult r = adam_train(net0, data, config.adam_config(config.data_seed + s));
        out.net = std::move(r.net);
        out.trace = objective_trace(r.objective);
        break;
      }
      case Method::kBcd: {
        TrainResult r = bcd_train(net0, data, config.bcd_config());
        out.net = std::move(r.net);
        out.trace = objective_trace(r.objective);
        break;
      }
    }
  } catch (const DivergenceError& e) {
    out.net = net0;
    out.status = "diverged";
    out.message = e.what();
    out.diverged = true;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Metrics signal_metrics(const Vector& x, const Vector& x_hat) {
  Metrics m;
  m.mse = mse(x, x_hat);
  m.psnr = psnr(x, x_hat, 1.0);
  const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(x.size()))));
  if (side * side == x.size()) {
    // Columns hold images flattened row-major; Eigen maps are column-major.
    const Matrix img = Eigen::Map<const Matrix>(x.data(), side, side).transpose();
    const Matrix img_hat = Eigen::Map<const Matrix>(x_hat.data(), side, side).transpose();
    m.ssim = ssim(img, img_hat, 1.0);
  } else {
    m.ssim = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

Metrics mean_metrics(const Matrix& X, const Matrix& X_hat) {
  if (X.rows() != X_hat.rows() || X.cols() != X_hat.cols() || X.cols() == 0)
    throw DimensionError("mean_metrics: shape mismatch");
  Metrics sum;
  long finite_psnr = 0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Metrics m = signal_metrics(X.col(j), X_hat.col(j));
    sum.mse += m.mse;
    sum.ssim += m.ssim;
    if (std::isfinite(m.psnr)) {
      sum.psnr += m.psnr;
      ++finite_psnr;
    }
  }
  const double k = static_cast<double>(X.cols());
  return {sum.mse / k,
          finite_psnr > 0 ? sum.psnr / static_cast<double>(finite_psnr)
                          : std::numeric_limits<double>::infinity(),
          sum.ssim / k};
}

std::vector<OuterTraceRow> objective_trace(const std::vector<double>& objective) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<OuterTraceRow> rows;
  for (std::size_t i = 0; i < objective.size(); ++i) {
    OuterTraceRow r;
    r.iter = static_cast<int>(i);
    r.lagrangian = objective[i];
    r.loss = r.constraint_norm = r.kkt = r.rho_scale = r.omega = r.eta = nan;
    rows.push_back(r);
  }
  return rows;
}

std::vector<BenchCell> run_bench(const RunConfig& config, int workers) {
  std::vector<SignalSet> signals;
  for (std::uint64_t s : config.seeds) signals.push_back(load_signals(config, s));

  std::vector<std::pair<Method, int>> grid;
  for (const auto& name : config.bench_methods)
    for (int m : config.bench_m) grid.emplace_back(parse_method(name), m);

  std::vector<BenchCell> cells(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < grid.size();)
      cells[i] = run_cell(config, signals, grid[i].first, grid[i].second);
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return cells;
}

void write_bench_csv(const std::string& path, const std::vector<BenchCell>& cells,
                     std::size_t num_seeds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "method,m,n,ratio,seeds,mse,psnr,ssim,status,error\n";
  for (const auto& c : cells) {
    out << c.method << ',' << c.m << ',' << c.n << ','
        << fmt(static_cast<double>(c.m) / c.n) << ',' << num_seeds << ',' << fmt(c.metrics.mse)
        << ',' << fmt(c.metrics.psnr) << ',' << fmt(c.metrics.ssim) << ','
        << (c.ok ? "ok" : "failed") << ',' << csv_escape(c.error) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_bench_table(const std::string& path, const std::vector<BenchCell>& cells) {
  std::vector<std::string> methods;
  std::vector<int> ms;
  for (const auto& c : cells) {
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
      methods.push_back(c.method);
    if (std::find(ms.begin(), ms.end(), c.m) == ms.end()) ms.push_back(c.m);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "metric,method";
  for (int m : ms) out << ",m=" << m;
  out << '\n';
  const char* names[] = {"psnr", "ssim", "mse"};
  for (const char* metric : names) {
    for (const auto& method : methods) {
      out << metric << ',' << method;
      for (int m : ms) {
        out << ',';
        for (const auto& c : cells) {
          if (c.method != method || c.m != m) continue;
          if (!c.ok) {
            out << "FAILED";
            break;
          }
          const std::string_view key(metric);
          out << fmt(key == "psnr" ? c.metrics.psnr : key == "ssim" ? c.metrics.ssim : c.metrics.mse);
          break;
        }
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace urnet::app
