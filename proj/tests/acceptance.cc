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

// Acceptance harness: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,4,7] [--bench-dir DIR]
//
// --bench-dir reuses an existing `urnet bench` output directory for
// criteria 7 and 8 instead of running the bench.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "block_oracles.h"
#include "run_config.h"
#include "urnet/cgt.h"
#include "urnet/csrecovery.h"
#include "urnet/datasets.h"

namespace {

using namespace urnet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome block_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240101);
  double worst_grad = 0.0, worst_gap = -1e300;
  bool bounds = true;
  for (int i = 0; i < 50; ++i) {
    const testing::TinyProblem p = testing::random_tiny_problem(rng, 8, 10);
    const auto r = testing::check_block_exactness(p.net, p.state, p.duals, p.pen, p.data);
    worst_grad = std::max(worst_grad, r.max_gradient);
    worst_gap = std::max(worst_gap, r.max_grid_gap);
    bounds &= r.bounds_ok;
  }
  const double t = seconds_since(t0);
  return {worst_grad <= 1e-8 && worst_gap <= 1e-10 && bounds && t < 60.0,
          "50 instances, max block gradient " + fmt("%.2e", worst_grad) + ", max grid gap " +
              fmt("%.2e", worst_gap) + ", bounds " + (bounds ? "ok" : "VIOLATED") + ", " +
              fmt("%.1f s", t)};
}

// ---------------------------------------------------------------------------

std::pair<double*, Eigen::Index> storage(const BlockId& b, NetworkParams& net, SampleState& st) {
  if (b.kind == BlockKind::W) return {net.W(b.layer).data(), net.W(b.layer).size()};
  if (b.kind == BlockKind::b) return {net.b(b.layer).data(), net.b(b.layer).size()};
  LayerState& l = st.layer(b.layer);
  Matrix* m = b.kind == BlockKind::u   ? &l.u
              : b.kind == BlockKind::v ? &l.v
              : b.kind == BlockKind::d ? &l.d
              : b.kind == BlockKind::s ? &l.s
                                       : &l.t;
  return {m->data(), m->size()};
}

Outcome gradient_check() {
  std::mt19937_64 rng(777);
  const double h = 1e-6;
  double worst = 0.0;
  int blocks = 0;
  for (int i = 0; i < 20; ++i) {
    testing::TinyProblem p = testing::random_tiny_problem(rng, 8, 10);
    const int L = p.net.num_layers();
    std::vector<BlockId> ids;
    for (int l = 1; l <= L; ++l) {
      ids.push_back({BlockKind::W, l});
      ids.push_back({BlockKind::b, l});
    }
    for (int k = 1; k < L; ++k)
      for (BlockKind kind : {BlockKind::u, BlockKind::v, BlockKind::d, BlockKind::s, BlockKind::t})
        ids.push_back({kind, k});
    for (const BlockId& b : ids) {
      const Matrix g = grad_auglag_block(b, p.net, p.state, p.duals, p.pen, p.data);
      auto [ptr, size] = storage(b, p.net, p.state);
      Matrix fd(g.rows(), g.cols());
      for (Eigen::Index j = 0; j < size; ++j) {
        const double x0 = ptr[j];
        ptr[j] = x0 + h;
        const double fp = eval_auglag(p.net, p.state, p.duals, p.pen, p.data);
        ptr[j] = x0 - h;
        const double fm = eval_auglag(p.net, p.state, p.duals, p.pen, p.data);
        ptr[j] = x0;
        fd.data()[j] = (fp - fm) / (2 * h);
      }
      worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-8));
      ++blocks;
    }
  }
  return {worst <= 1e-4, "20 instances, " + std::to_string(blocks) +
                             " blocks, max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------------------

Outcome monotonicity() {
  std::mt19937_64 rng(31337);
  double worst = -1e300;
  long updates = 0;
  for (int i = 0; i < 10; ++i) {
    testing::TinyProblem p = testing::random_tiny_problem(rng, 8, 10);
    double prev = eval_auglag(p.net, p.state, p.duals, p.pen, p.data);
    SweepOptions opt;
    opt.on_block = [&](const BlockEvent& e) {
      worst = std::max(worst, e.value - prev);
      prev = e.value;
      ++updates;
    };
    for (int s = 0; s < 200; ++s) inner_sweep(p.net, p.state, p.duals, p.pen, p.data, opt, s);
  }
  return {worst <= 1e-10, "10 problems x 200 sweeps, " + std::to_string(updates) +
                              " block updates, max increase " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------------------

struct LemmaRun {
  Matrix inputs;
  CgtResult result;
  CgtOptions options;
  double seconds = 0.0;
};

// Tiny teacher-student regression: X ~ N(0, 1) 6 x 20, Y from a random
// 6-8-4 ReLU teacher.
LemmaRun lemma_run(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix X = testing::gaussian_matrix(6, 20, rng);
  const std::vector<int> dims = {6, 8, 4};
  const TrainingData data{X, forward(init_gaussian(dims, 0.5, seed + 100), X)};
  LemmaRun run;
  run.inputs = X;
  run.options.omega_star = 1e-4;
  run.options.eta_star = 1e-4;
  run.options.max_outer = 200;
  run.options.max_inner_sweeps = 1000;
  run.options.inner_method = InnerMethod::kSweepsThenNewton;
  run.options.max_newton_iterations = 200;
  run.options.record_sweeps = false;
  const auto t0 = Clock::now();
  run.result = cgt_train(init_gaussian(dims, 0.5, seed + 7), data, PenaltyParams{}, run.options);
  run.seconds = seconds_since(t0);
  return run;
}

std::vector<LemmaRun>& lemma_runs() {
  static std::vector<LemmaRun> runs = [] {
    std::vector<LemmaRun> r;
    for (std::uint64_t seed : {1, 2, 3}) r.push_back(lemma_run(seed));
    return r;
  }();
  return runs;
}

Outcome lemma1() {
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < lemma_runs().size(); ++i) {
    const LemmaRun& run = lemma_runs()[i];
    const CgtResult& r = run.result;
    const double cnorm = residuals(r.net, run.inputs, r.state).norm();
    long checked = 0, bad = 0;
    double worst = 0.0;
    for (const LayerState& l : r.state.layers)
      for (Eigen::Index j = 0; j < l.u.cols(); ++j)
        for (Eigen::Index u = 0; u < l.u.rows(); ++u) {
          if (std::abs(l.u(u, j)) <= 1e-3) continue;
          ++checked;
          const double dist = std::min(l.d(u, j), 1.0 - l.d(u, j));
          worst = std::max(worst, dist);
          if (dist > 1e-2) ++bad;
        }
    // Seed 1 is the pinned instance and must converge. The other seeds are
    // extra evidence: their final iterate is checked whatever the status.
    const bool converged = r.status == CgtStatus::kConverged || i > 0;
    const bool ok = converged && cnorm <= 1e-4 && bad == 0 && checked > 0 && run.seconds < 300.0;
    pass &= ok;
    detail += (i ? "; " : "") + std::string("seed ") + std::to_string(i + 1) + ": " +
              to_string(r.status) + " after " + std::to_string(r.trace.size()) + " outer, ||c|| " +
              fmt("%.1e", cnorm) + ", " + std::to_string(checked) + " units, max min(d,1-d) " +
              fmt("%.1e", worst) + ", " + fmt("%.1f s", run.seconds);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome schedule() {
  int feasible = 0, infeasible = 0, mismatches = 0, rows = 0;
  for (const LemmaRun& run : lemma_runs()) {
    const CgtOptions& o = run.options;
    double rho = o.rho_scale0, omega = o.omega0, eta = o.eta0;
    for (const OuterTraceRow& row : run.result.trace) {
      ++rows;
      if (row.rho_scale != rho || row.omega != omega || row.eta != eta) ++mismatches;
      if (row.constraint_norm <= eta) {
        ++feasible;
        const double beta = std::min(1.0 / rho, 0.1);
        omega = omega * beta;
        eta = eta * std::pow(beta, 0.9);
      } else {
        ++infeasible;
        const double inv_rho = o.tau / rho;
        rho = 1.0 / inv_rho;
        const double beta = std::min(inv_rho, 0.1);
        omega = o.omega0 * beta;
        eta = o.eta0 * std::pow(beta, 0.1);
      }
    }
  }
  return {mismatches == 0 && feasible > 0 && infeasible > 0,
          std::to_string(rows) + " logged outer iterations (" + std::to_string(feasible) +
              " feasible, " + std::to_string(infeasible) + " infeasible), " +
              std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------------------

Outcome unrectify_equivalence() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> layers(2, 5), width(1, 16);
  double worst_rel = 0.0, worst_res = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<int> dims(static_cast<std::size_t>(layers(rng)) + 1);
    for (int& d : dims) d = width(rng);
    const NetworkParams net = testing::random_net(dims, rng, 0.8);
    const Vector x = testing::gaussian_matrix(dims.front(), 1, rng);
    const Vector y = forward(net, x);
    const SampleState st = unrectify_forward(net, x);
    const Vector z = output_from_state(net, st, x);
    worst_rel = std::max(worst_rel, (y - z).norm() / std::max(y.norm(), 1e-300));
    worst_res = std::max(worst_res, residuals(net, x, st).max_abs());
  }
  return {worst_rel <= 1e-12 && worst_res == 0.0,
          "1000 pairs, max relative output gap " + fmt("%.2e", worst_rel) + ", max |residual| " +
              fmt("%.1e", worst_res)};
}

// ---------------------------------------------------------------------------

struct BenchRow {
  std::string method;
  int m = 0;
  double mse = 0.0;
  std::string status;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

struct BenchData {
  bool ok = false;
  std::string error;
  std::vector<BenchRow> rows;
  std::map<std::string, double> seconds;  // per method
  double wall = 0.0;
};

BenchData& bench(const std::string& reuse_dir) {
  static BenchData data = [&] {
    BenchData b;
    fs::path dir = reuse_dir;
    if (dir.empty()) {
      dir = testing::temp_path("acceptance_bench");
      fs::remove_all(dir);
      const std::string cmd = std::string(URNET_CLI_PATH) + " bench --run-dir " + dir.string() +
                              " > " + testing::temp_path("acceptance_bench.log").string() + " 2>&1";
      const auto t0 = Clock::now();
      const int status = std::system(cmd.c_str());
      b.wall = seconds_since(t0);
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        b.error = "bench exited with status " + std::to_string(WEXITSTATUS(status));
        return b;
      }
    }
    std::ifstream csv(dir / "bench.csv");
    std::string line;
    if (!std::getline(csv, line) || line != "method,m,n,ratio,seeds,mse,psnr,ssim,status,error") {
      b.error = "missing or malformed bench.csv";
      return b;
    }
    while (std::getline(csv, line)) {
      const auto c = split(line);
      if (c.size() < 9) continue;
      b.rows.push_back({c[0], std::stoi(c[1]), std::stod(c[5]), c[8]});
    }
    std::ifstream timing(dir / "timing.csv");
    std::getline(timing, line);
    while (std::getline(timing, line)) {
      const auto c = split(line);
      if (c.size() == 3) b.seconds[c[0]] += std::stod(c[2]);
    }
    b.ok = true;
    return b;
  }();
  return data;
}

// MSE of the curve for one method, ordered by m.
std::vector<std::pair<int, double>> curve(const BenchData& b, const std::string& method) {
  std::vector<std::pair<int, double>> out;
  for (const BenchRow& r : b.rows)
    if (r.method == method && r.status == "ok") out.emplace_back(r.m, r.mse);
  std::sort(out.begin(), out.end());
  return out;
}

bool strictly_decreasing(const std::vector<std::pair<int, double>>& c) {
  for (std::size_t i = 1; i < c.size(); ++i)
    if (!(c[i].second < c[i - 1].second)) return false;
  return c.size() >= 2;
}

std::string describe(const std::vector<std::pair<int, double>>& c) {
  std::string s;
  for (const auto& [m, e] : c) s += (s.empty() ? "" : " ") + std::to_string(m) + ":" + fmt("%.4f", e);
  return s;
}

// Untrained-network test MSE at the largest m, averaged over the bench seeds.
double untrained_mse(const app::RunConfig& cfg, int m) {
  double total = 0.0;
  for (std::uint64_t s : cfg.seeds) {
    const Matrix X = gen_sparse(cfg.sparse_n, cfg.sparse_k, cfg.test_count, cfg.test_seed + s).samples;
    const SensingProblem A = gen_sensing(m, cfg.sparse_n, cfg.sensing_seed + s);
    const NetworkParams net = init_gaussian(cfg.layer_dims, cfg.init_sigma, cfg.init_seed + s);
    total += mse(X, recover(net, A, Matrix(A.A * X)));
  }
  return total / static_cast<double>(cfg.seeds.size());
}

Outcome cs_trend(const std::string& reuse_dir) {
  const app::RunConfig cfg;
  const bool setup = cfg.dataset == "sparse" && cfg.sparse_n == 32 && cfg.sparse_k == 4 &&
                     cfg.train_count == 500 && cfg.layer_dims.size() == 4 && cfg.seeds.size() == 3 &&
                     cfg.bench_m == std::vector<int>{4, 8, 16, 24};
  if (!setup) return {false, "default bench config is not the n=32, k=4, N=500, 3-seed setup"};
  const BenchData& b = bench(reuse_dir);
  if (!b.ok) return {false, b.error};
  const auto c = curve(b, "unrectify");
  if (c.size() != 4) return {false, "unrectify curve incomplete: " + describe(c)};
  const double base = untrained_mse(cfg, 24);
  const double ratio = base / c.back().second;
  const double runtime = b.seconds.count("unrectify") ? b.seconds.at("unrectify") : 0.0;
  return {strictly_decreasing(c) && ratio >= 10.0 && runtime < 900.0,
          "unrectify mean test MSE " + describe(c) + ", untrained " + fmt("%.4f", base) + " (" +
              fmt("%.1fx", ratio) + " at m=24), runtime " + fmt("%.0f s", runtime)};
}

Outcome baseline_parity(const std::string& reuse_dir) {
  const BenchData& b = bench(reuse_dir);
  if (!b.ok) return {false, b.error};
  bool pass = true;
  std::string detail;
  for (const char* method : {"unrectify", "adam", "bcd"}) {
    const auto c = curve(b, method);
    const bool ok = c.size() == 4 && strictly_decreasing(c);
    pass &= ok;
    detail += (detail.empty() ? "" : "; ") + std::string(method) + " " + describe(c) +
              (ok ? "" : " (not decreasing)");
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome pipeline() {
  double worst_inv = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = i % 2 ? 784 : 1024;
    const int m = 1 + (i * 97) % (n / 2);
    worst_inv = std::max(worst_inv, right_inverse_error(gen_sensing(m, n, 100 + i)));
  }
  std::mt19937_64 rng(5);
  double worst_patch = 0.0;
  for (auto [r, c] : {std::pair{32, 32}, {36, 36}, {64, 64}, {75, 50}, {256, 256}}) {
    const Matrix img = testing::uniform_matrix(r, c, rng, 0.0, 1.0);
    const PatchGeometry g = patch_geometry(r, c, 32, 4);
    worst_patch = std::max(worst_patch,
                           (reconstruct_average(extract_patches(img, g), g) - img).cwiseAbs().maxCoeff());
  }
  bool pass = worst_inv <= 1e-8 && worst_patch <= 1e-12;
  std::string detail = "20 sensing problems, max ||AA+ - I|| " + fmt("%.1e", worst_inv) +
                       "; patch round trip max error " + fmt("%.1e", worst_patch);

  const char* mnist_dir = std::getenv("URNET_MNIST_DIR");
  const fs::path dir = mnist_dir ? mnist_dir : "";
  const fs::path train_img = dir / "train-images-idx3-ubyte", train_lbl = dir / "train-labels-idx1-ubyte";
  const fs::path test_img = dir / "t10k-images-idx3-ubyte", test_lbl = dir / "t10k-labels-idx1-ubyte";
  if (mnist_dir && fs::exists(train_img) && fs::exists(train_lbl) && fs::exists(test_img) &&
      fs::exists(test_lbl)) {
    const Dataset train = load_mnist_idx(train_img, train_lbl);
    const Dataset test = load_mnist_idx(test_img, test_lbl);
    const double nz = static_cast<double>((train.samples.array() != 0.0).count()) /
                      static_cast<double>(train.size());
    const bool ok = train.size() == 60000 && test.size() == 10000 && train.dim() == 784 &&
                    std::abs(nz - 180.0) <= 10.0;
    pass &= ok;
    detail += "; MNIST " + std::to_string(train.size()) + "/" + std::to_string(test.size()) +
              ", mean nonzero pixels " + fmt("%.1f", nz);
  } else {
    detail += "; MNIST check skipped (set URNET_MNIST_DIR to the official IDX files)";
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::string bench_dir;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else if (a == "--bench-dir" && i + 1 < argc) {
      bench_dir = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2,...] [--bench-dir DIR]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"block exactness", block_exactness},
      {"gradient check", gradient_check},
      {"sweep monotonicity", monotonicity},
      {"binary activations at convergence", lemma1},
      {"penalty/tolerance schedule", schedule},
      {"un-rectify equivalence", unrectify_equivalence},
      {"CS trend", [&] { return cs_trend(bench_dir); }},
      {"baseline parity", [&] { return baseline_parity(bench_dir); }},
      {"pipeline invariants", pipeline},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d (%s): %s - %s\n", id, criteria[i].first.c_str(),
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
