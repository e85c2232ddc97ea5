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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "urnet/cgt.h"
#include "urnet/csrecovery.h"
#include "urnet/datasets.h"
#include "urnet/model.h"
#include "urnet/unrectify.h"

namespace py = pybind11;
using namespace urnet;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Un-rectified ReLU networks trained by an augmented Lagrangian method.";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_IOError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  py::class_<NetworkParams>(m, "Network")
      .def(py::init(&zero_network), py::arg("layer_dims"))
      .def_readonly("layer_dims", &NetworkParams::layer_dims)
      .def_readwrite("weights", &NetworkParams::weights)
      .def_readwrite("biases", &NetworkParams::biases)
      .def_property_readonly("num_layers", &NetworkParams::num_layers)
      .def("forward", [](const NetworkParams& n, const Matrix& x) { return forward(n, x); },
           py::arg("x"), "Forward pass on the columns of x.")
      .def("save", [](const NetworkParams& n, const std::filesystem::path& p) { save_checkpoint(n, p); })
      .def_static("load", &load_checkpoint, py::arg("path"));

  m.def("init_gaussian", &init_gaussian, py::arg("layer_dims"), py::arg("sigma"), py::arg("seed"));

  m.def(
      "unrectify_residual",
      [](const NetworkParams& n, const Matrix& x) {
        return residuals(n, x, unrectify_forward(n, x)).max_abs();
      },
      py::arg("net"), py::arg("x"),
      "Largest constraint residual of the state built from a forward pass.");

  py::class_<SensingProblem>(m, "SensingProblem")
      .def_readonly("A", &SensingProblem::A)
      .def_readonly("A_pinv", &SensingProblem::A_pinv)
      .def_readonly("m", &SensingProblem::m)
      .def_readonly("n", &SensingProblem::n)
      .def_readonly("seed", &SensingProblem::seed)
      .def("right_inverse_error", &right_inverse_error)
      .def("save", [](const SensingProblem& s, const std::filesystem::path& p) { save_sensing(s, p); })
      .def_static("load", &load_sensing, py::arg("path"));

  m.def("gen_sensing", &gen_sensing, py::arg("m"), py::arg("n"), py::arg("seed"));
  m.def(
      "recover",
      [](const NetworkParams& n, const SensingProblem& s, const Matrix& y) { return recover(n, s, y); },
      py::arg("net"), py::arg("problem"), py::arg("y"));
  m.def(
      "gen_sparse",
      [](int n, int k, int count, std::uint64_t seed) { return gen_sparse(n, k, count, seed).samples; },
      py::arg("n"), py::arg("k"), py::arg("count"), py::arg("seed"));

  m.def("mse", &mse);
  m.def("psnr", &psnr, py::arg("x"), py::arg("x_hat"), py::arg("peak") = 1.0);
  m.def(
      "ssim", [](const Matrix& x, const Matrix& y, double peak) { return ssim(x, y, peak); },
      py::arg("x"), py::arg("x_hat"), py::arg("peak") = 1.0);

  m.def(
      "train",
      [](const NetworkParams& net, const Matrix& x, const Matrix& y, int max_outer, int max_inner_sweeps) {
        CgtOptions opt;
        opt.max_outer = max_outer;
        opt.max_inner_sweeps = max_inner_sweeps;
        opt.record_sweeps = false;
        CgtResult r = [&] {
          py::gil_scoped_release release;
          return cgt_train(net, TrainingData{x, y}, PenaltyParams{}, opt);
        }();
        py::list trace;
        for (const OuterTraceRow& row : r.trace) {
          py::dict d;
          d["iter"] = row.iter;
          d["L"] = row.lagrangian;
          d["loss"] = row.loss;
          d["constraint_norm"] = row.constraint_norm;
          d["kkt"] = row.kkt;
          d["rho_scale"] = row.rho_scale;
          d["omega"] = row.omega;
          d["eta"] = row.eta;
          trace.append(d);
        }
        return py::make_tuple(r.net, to_string(r.status), trace);
      },
      py::arg("net"), py::arg("x"), py::arg("y"), py::arg("max_outer") = 200,
      py::arg("max_inner_sweeps") = 1000,
      "Trains with default penalties. Returns (network, status, trace rows).");
}
