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

// urnet: train, evaluate and benchmark un-rectified ReLU networks on
// compressed-sensing recovery.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 data error, 4 solver divergence.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "experiment.h"
#include "run_config.h"
#include "urnet/datasets.h"
#include "urnet/runtime.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace urnet;
using namespace urnet::app;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kDivergence = 4 };

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
  std::string method;
  std::string run_dir;
  std::string output_dir;
};

void add_config_args(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.path, "JSON config file");
  cmd->add_option("--set", args.overrides, "Override a config key: key=value (repeatable)");
  cmd->add_option("--output-dir", args.output_dir, "Parent directory for the run directory");
  cmd->add_option("--run-dir", args.run_dir, "Write artifacts here instead of a fresh run directory");
}

RunConfig resolve_config(const ConfigArgs& args) {
  RunConfig cfg = args.path.empty() ? RunConfig{} : load_config(args.path);
  for (const auto& o : args.overrides) cfg = apply_override(std::move(cfg), o);
  if (!args.method.empty()) cfg.method = parse_method(args.method);
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  cfg.validate();
  return cfg;
}

fs::path make_run_dir(const RunConfig& cfg, const ConfigArgs& args, const char* command) {
  fs::path dir;
  if (!args.run_dir.empty()) {
    dir = args.run_dir;
  } else {
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", std::gmtime(&now));
    dir = fs::path(cfg.output_dir) /
          (std::string(command) + "-" + stamp + "-" + config_hash(cfg).substr(0, 8));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create run directory " + dir.string() + ": " + ec.message());
  std::ofstream(dir / "config.json") << to_json(cfg).dump(2) << '\n';
  return dir;
}

json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json finite_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- train

int cmd_train(const ConfigArgs& args) {
  const RunConfig cfg = resolve_config(args);
  const fs::path dir = make_run_dir(cfg, args, "train");
  std::cerr << "run directory: " << dir.string() << '\n';

  const SignalSet signals = load_signals(cfg, cfg.seed);
  const SensingProblem sensing = make_sensing(cfg, cfg.sensing_m, cfg.seed);
  const TrainingData data = build_training(signals.train, sensing);

  TrainOutcome out = train_method(cfg, cfg.method, data, cfg.seed);
  save_sensing(sensing, dir / "sensing.ursm");
  save_checkpoint(out.net, dir / "model.urnw");
  write_trace_csv(dir / "trace.csv", out.trace);

  const Matrix fit = forward(out.net, data.inputs);
  const double final_loss = 0.5 * (data.targets - fit).squaredNorm();
  const Metrics train_m = mean_metrics(data.targets, fit);
  const Matrix X_hat = recover(out.net, sensing, Matrix(sensing.A * signals.test));
  const Metrics test_m = mean_metrics(signals.test, X_hat);

  json summary = {
      {"method", to_string(cfg.method)},
      {"status", out.status},
      {"message", out.message},
      {"final_loss", finite_or_null(final_loss)},
      {"constraint_norm", optional_number(out.constraint_norm)},
      {"kkt", optional_number(out.kkt)},
      {"wall_time_s", out.seconds},
      {"iterations", out.trace.size()},
      {"m", sensing.m},
      {"n", sensing.n},
      {"train_samples", data.size()},
      {"test_samples", signals.test.cols()},
      {"train_mse", finite_or_null(train_m.mse)},
      {"test_mse", finite_or_null(test_m.mse)},
      {"test_psnr", finite_or_null(test_m.psnr)},
      {"test_ssim", finite_or_null(test_m.ssim)},
      {"data", signals.provenance},
      {"config_hash", config_hash(cfg)},
  };
  write_json(dir / "summary.json", summary);
  std::cout << dir.string() << '\n';
  if (out.diverged) {
    std::cerr << "error: training diverged: " << out.message << '\n';
    return kDivergence;
  }
  return kOk;
}

// ---------------------------------------------------------------- recover

struct RecoverArgs {
  ConfigArgs config;
  std::string checkpoint;
  std::string sensing;
  std::vector<std::string> runs;
  std::string measurements;
  std::string truth;
  std::string signals;
  std::string image;
};

// One sample per CSV row; a non-numeric first row is treated as a header.
Matrix read_csv_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw DataError(path + ": non-numeric row '" + line + "'");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  Matrix out(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i) out(i, j) = rows[j][i];
  return out;
}

void write_csv_columns(const fs::path& path, const Matrix& columns) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.precision(17);
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    for (Eigen::Index i = 0; i < columns.rows(); ++i) out << (i ? "," : "") << columns(i, j);
    out << '\n';
  }
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void check_dims(const NetworkParams& net, const SensingProblem& sensing, const std::string& what) {
  if (net.input_dim() != sensing.n)
    throw DimensionError(what + ": network input " + std::to_string(net.input_dim()) +
                         " does not match sensing n = " + std::to_string(sensing.n));
}

int cmd_recover(const RecoverArgs& args) {
  std::vector<std::pair<std::string, std::string>> pairs;  // checkpoint, sensing
  for (const auto& r : args.runs)
    pairs.emplace_back((fs::path(r) / "model.urnw").string(), (fs::path(r) / "sensing.ursm").string());
  if (!args.checkpoint.empty() || !args.sensing.empty()) {
    if (args.checkpoint.empty() || args.sensing.empty())
      throw ConfigError("--checkpoint and --sensing must be given together");
    pairs.emplace_back(args.checkpoint, args.sensing);
  }
  if (pairs.empty()) throw ConfigError("recover needs --run or --checkpoint/--sensing");
  const int sources = !args.measurements.empty() + !args.signals.empty() + !args.image.empty();
  if (sources > 1) throw ConfigError("use at most one of --measurements, --signals, --image");
  if (!args.truth.empty() && args.measurements.empty())
    throw ConfigError("--truth only applies to --measurements");

  // Without --config, the first run's saved config supplies the test data.
  ConfigArgs config_args = args.config;
  if (config_args.path.empty() && !args.runs.empty() &&
      fs::exists(fs::path(args.runs.front()) / "config.json"))
    config_args.path = (fs::path(args.runs.front()) / "config.json").string();
  RunConfig cfg = resolve_config(config_args);
  if (args.config.output_dir.empty() && config_args.path != args.config.path)
    cfg.output_dir = RunConfig{}.output_dir;
  const fs::path dir = make_run_dir(cfg, args.config, "recover");
  std::cerr << "run directory: " << dir.string() << '\n';

  std::ofstream per_sample(dir / "metrics.csv");
  per_sample << "run,m,n,ratio,sample,mse,psnr,ssim\n";
  std::ofstream summary(dir / "summary.csv");
  summary << "run,m,n,ratio,samples,mse,psnr,ssim\n";

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const NetworkParams net = load_checkpoint(pairs[k].first);
    const SensingProblem sensing = load_sensing(pairs[k].second);
    check_dims(net, sensing, pairs[k].first);
    const double ratio = static_cast<double>(sensing.m) / sensing.n;
    const std::string prefix = std::to_string(k) + "," + std::to_string(sensing.m) + "," +
                               std::to_string(sensing.n) + "," + num(ratio);

    if (!args.image.empty()) {
      const Matrix image = load_grayscale_image(args.image);
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(sensing.n))));
      if (side * side != sensing.n)
        throw DimensionError("--image needs a square patch size, sensing n = " + std::to_string(sensing.n));
      const PatchGeometry geom = patch_geometry(static_cast<int>(image.rows()),
                                                static_cast<int>(image.cols()), side,
                                                cfg.patch_stride);
      const Matrix patches = extract_patches(image, geom);
      const Matrix recovered = recover(net, sensing, Matrix(sensing.A * patches));
      const Matrix image_hat = reconstruct_average(recovered, geom);
      write_pgm(image_hat, dir / ("recovered_" + std::to_string(k) + ".pgm"));
      const double e = mse(image, image_hat);
      const double p = psnr(image, image_hat, 1.0);
      const double s = ssim(image, image_hat, 1.0);
      per_sample << prefix << ",0," << num(e) << ',' << num(p) << ',' << num(s) << '\n';
      summary << prefix << ",1," << num(e) << ',' << num(p) << ',' << num(s) << '\n';
      continue;
    }

    Matrix Y;
    std::optional<Matrix> X;
    if (!args.measurements.empty()) {
      Y = read_csv_columns(args.measurements);
      if (!args.truth.empty()) X = read_csv_columns(args.truth);
    } else {
      X = args.signals.empty() ? load_signals(cfg, cfg.seed).test : read_csv_columns(args.signals);
      if (X->rows() != sensing.n)
        throw DimensionError("signals have length " + std::to_string(X->rows()) +
                             ", sensing n = " + std::to_string(sensing.n));
      Y = sensing.A * *X;
    }
    if (Y.rows() != sensing.m)
      throw DimensionError("measurements have length " + std::to_string(Y.rows()) +
                           ", sensing m = " + std::to_string(sensing.m));
    const Matrix X_hat = recover(net, sensing, Y);
    write_csv_columns(dir / ("reconstructions_" + std::to_string(k) + ".csv"), X_hat);

    if (!X) {
      summary << prefix << ',' << Y.cols() << ",nan,nan,nan\n";
      continue;
    }
    if (X->rows() != X_hat.rows() || X->cols() != X_hat.cols())
      throw DimensionError("truth shape does not match the reconstructions");
    for (Eigen::Index j = 0; j < X->cols(); ++j) {
      const Metrics m = signal_metrics(X->col(j), X_hat.col(j));
      per_sample << prefix << ',' << j << ',' << num(m.mse) << ',' << num(m.psnr) << ','
                 << num(m.ssim) << '\n';
    }
    const Metrics mean = mean_metrics(*X, X_hat);
    summary << prefix << ',' << X->cols() << ',' << num(mean.mse) << ',' << num(mean.psnr) << ','
            << num(mean.ssim) << '\n';
  }
  if (!per_sample || !summary) throw DataError("failed writing metrics in " + dir.string());
  std::cout << dir.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const ConfigArgs& args) {
  const RunConfig cfg = resolve_config(args);
  cfg.validate_bench();
  const int workers = thread_count();
  const fs::path dir = make_run_dir(cfg, args, "bench");
  std::cerr << "run directory: " << dir.string() << " (" << workers << " workers)\n";

  const std::vector<BenchCell> cells = run_bench(cfg, workers);
  write_bench_csv((dir / "bench.csv").string(), cells, cfg.seeds.size());
  write_bench_table((dir / "bench_table.csv").string(), cells);
  std::ofstream timing(dir / "timing.csv");
  timing << "method,m,seconds\n";
  int failed = 0;
  for (const auto& c : cells) {
    timing << c.method << ',' << c.m << ',' << num(c.seconds) << '\n';
    if (!c.ok) {
      ++failed;
      std::cerr << "cell " << c.method << " m=" << c.m << " failed: " << c.error << '\n';
    }
  }
  std::cout << dir.string() << '\n';
  return failed == 0 ? kOk : kFailure;
}

// ---------------------------------------------------------------- small tools

int cmd_gen_sensing(int m, int n, std::uint64_t seed, const std::string& out) {
  const SensingProblem p = gen_sensing(m, n, seed);
  save_sensing(p, out);
  std::cout << json{{"path", out},
                    {"m", p.m},
                    {"n", p.n},
                    {"seed", p.seed},
                    {"right_inverse_error", right_inverse_error(p)}}
                   .dump()
            << '\n';
  return kOk;
}

int cmd_inspect(const std::string& path) {
  const NetworkParams net = load_checkpoint(path);
  json layers = json::array();
  std::size_t params = 0;
  for (int l = 1; l <= net.num_layers(); ++l) {
    params += static_cast<std::size_t>(net.W(l).size() + net.b(l).size());
    layers.push_back({{"layer", l},
                      {"shape", {net.W(l).rows(), net.W(l).cols()}},
                      {"weight_fro", net.W(l).norm()},
                      {"bias_norm", net.b(l).norm()}});
  }
  std::cout << json{{"path", path},
                    {"version", kCheckpointVersion},
                    {"num_layers", net.num_layers()},
                    {"layer_dims", net.layer_dims},
                    {"parameters", params},
                    {"layers", layers}}
                   .dump(2)
            << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();

  CLI::App app{"Un-rectified ReLU network training and compressed-sensing recovery"};
  app.require_subcommand(1);

  ConfigArgs train_args;
  auto* train = app.add_subcommand("train", "Train one network and write checkpoint, trace and summary");
  add_config_args(train, train_args);
  train->add_option("--method", train_args.method, "unrectify, adam or bcd");

  RecoverArgs rec;
  auto* recover_cmd = app.add_subcommand("recover", "Recover signals with trained networks and score them");
  add_config_args(recover_cmd, rec.config);
  recover_cmd->add_option("--run", rec.runs, "Train run directory (repeatable; one summary row each)");
  recover_cmd->add_option("--checkpoint", rec.checkpoint, "Checkpoint file (URNW)");
  recover_cmd->add_option("--sensing", rec.sensing, "Sensing file (URSM)");
  recover_cmd->add_option("--measurements", rec.measurements, "CSV, one measurement vector per row");
  recover_cmd->add_option("--truth", rec.truth, "CSV of true signals matching --measurements");
  recover_cmd->add_option("--signals", rec.signals, "CSV of signals to measure and recover");
  recover_cmd->add_option("--image", rec.image, "P5 PGM image recovered patch by patch");

  ConfigArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Method x CS-ratio comparison table");
  add_config_args(bench, bench_args);

  int gm = 0, gn = 0;
  std::uint64_t gseed = 0;
  std::string gout;
  auto* gen = app.add_subcommand("gen-sensing", "Write a Gaussian sensing matrix");
  gen->add_option("--m", gm, "Measurements")->required();
  gen->add_option("--n", gn, "Signal length")->required();
  gen->add_option("--seed", gseed, "RNG seed");
  gen->add_option("-o,--out", gout, "Output file")->required();

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect-checkpoint", "Print checkpoint metadata as JSON");
  inspect->add_option("checkpoint", inspect_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (recover_cmd->parsed()) return cmd_recover(rec);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (gen->parsed()) return cmd_gen_sensing(gm, gn, gseed, gout);
    if (inspect->parsed()) return cmd_inspect(inspect_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DimensionError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
