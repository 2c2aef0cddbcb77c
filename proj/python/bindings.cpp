// Copyright 2026 The madapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "madapt/config.hpp"
#include "madapt/experiments.hpp"
#include "madapt/feature_file.hpp"
#include "madapt/losses.hpp"
#include "madapt/metrics.hpp"
#include "madapt/train.hpp"

namespace py = pybind11;
using namespace madapt;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor matrix_from(const Array& a, const char* what) {
  if (a.ndim() != 2) {
    throw py::value_error(std::string(what) + " must be a 2-D array");
  }
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto d = static_cast<std::size_t>(a.shape(1));
  return Tensor::from({n, d}, std::vector<double>(a.data(), a.data() + n * d));
}

KernelSpec kernel_from(const py::object& sigma) {
  return sigma.is_none() ? KernelSpec::median() : KernelSpec::fixed(sigma.cast<double>());
}

std::map<std::string, std::string> as_map(const ExperimentConfig& c) {
  std::map<std::string, std::string> out;
  std::istringstream in(print_config(c));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    out.emplace(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

py::dict dataset_dict(const Dataset& d) {
  const auto n = static_cast<py::ssize_t>(d.size());
  const auto k = static_cast<py::ssize_t>(d.regions_per_image);
  const auto g = static_cast<py::ssize_t>(d.grid_cells);
  const auto dv = static_cast<py::ssize_t>(d.feature_dim);
  Array regions({n, k, dv}), grid({n, g, dv});
  double* r = regions.mutable_data();
  double* q = grid.mutable_data();
  py::list tokens, answers, categories, domains;
  for (const Sample& s : d.samples) {
    r = std::copy(s.regions.begin(), s.regions.end(), r);
    q = std::copy(s.grid.begin(), s.grid.end(), q);
    tokens.append(py::cast(s.tokens));
    answers.append(py::cast(std::vector<std::string>(s.answers.begin(), s.answers.end())));
    categories.append(std::string(category_name(s.category)));
    domains.append(s.domain == DomainTag::kSource ? "source" : "target");
  }
  py::dict out;
  out["regions"] = regions;
  out["grid"] = grid;
  out["tokens"] = tokens;
  out["answers"] = answers;
  out["categories"] = categories;
  out["domains"] = domains;
  out["token_vocab_size"] = d.token_vocab_size;
  return out;
}

}  // namespace

PYBIND11_MODULE(_madapt, m) {
  m.doc() = "Multi-modal domain adaptation for VQA (native core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FeatureFileError>(m, "FeatureFileError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init([](const std::string& text,
                       const std::map<std::string, std::string>& overrides) {
             std::vector<std::pair<std::string, std::string>> ov(overrides.begin(),
                                                                 overrides.end());
             return parse_config(text, ov);
           }),
           py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{})
      .def("set",
           [](ExperimentConfig& c, const std::string& key, const std::string& value) {
             set_config_value(c, key, value);
           })
      .def("get",
           [](const ExperimentConfig& c, const std::string& key) {
             const auto all = as_map(c);
             const auto it = all.find(key);
             if (it == all.end()) throw py::key_error(key);
             return it->second;
           })
      .def("as_dict", &as_map)
      .def("validate", &validate_config)
      .def("__str__", &print_config)
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });

  m.def("config_keys", &config_keys);

  m.def("gaussian_kernel",
        [](const std::vector<double>& x, const std::vector<double>& y, double sigma) {
          return gaussian_kernel(x, y, sigma);
        },
        py::arg("x"), py::arg("y"), py::arg("sigma"));

  m.def("mmd_sq",
        [](const Array& x, const Array& y, const py::object& sigma) {
          return mmd_sq(matrix_from(x, "x"), matrix_from(y, "y"), kernel_from(sigma)).item();
        },
        py::arg("x"), py::arg("y"), py::arg("sigma") = py::none(),
        "Biased squared MMD with a Gaussian kernel; sigma=None uses the median "
        "pairwise distance of the pooled rows.");

  m.def("vqa_accuracy",
        [](const std::string& predicted, const std::vector<std::string>& answers) {
          return vqa_accuracy(predicted, answers);
        },
        py::arg("predicted"), py::arg("answers"));

  m.def("lr_at", [](std::uint64_t iteration) { return lr_at(Schedule{}, iteration); },
        py::arg("iteration"));

  m.def("load_features",
        [](const std::string& path) { return dataset_dict(load_feature_file(path)); },
        py::arg("path"));

  m.def("write_benchmark",
        [](const ExperimentConfig& c, const std::string& out_dir) {
          const Benchmark b = generate_benchmark(c);
          const std::filesystem::path dir(out_dir);
          std::filesystem::create_directories(dir);
          std::map<std::string, std::string> paths;
          const std::pair<const char*, const Dataset*> splits[] = {
              {"source_train", &b.source_train},
              {"target_train", &b.target_train},
              {"source_test", &b.source_test},
              {"target_test", &b.target_test}};
          for (const auto& [name, data] : splits) {
            const auto path = dir / (std::string(name) + ".mmf");
            save_feature_file(*data, path);
            paths[name] = path.string();
          }
          return paths;
        },
        py::arg("config"), py::arg("out_dir"),
        "Generates the synthetic benchmark described by `config` and writes one "
        "feature file per split. Returns the split-to-path mapping.");

  m.def("probe_domain_gap",
        [](const Array& fs, const Array& ft, const py::object& sigma, std::uint64_t seed) {
          ProbeOptions o;
          o.seed = seed;
          const ProbeResult r = probe_domain_gap(matrix_from(fs, "features_s"),
                                                 matrix_from(ft, "features_t"),
                                                 kernel_from(sigma), o);
          return py::make_tuple(r.mmd_sq, r.accuracy);
        },
        py::arg("features_s"), py::arg("features_t"), py::arg("sigma") = py::none(),
        py::arg("seed") = 0, "Returns (mmd_sq, held-out probe accuracy).");

  m.def("compare_methods",
        [](const ExperimentConfig& c, std::uint64_t seed) {
          py::gil_scoped_release release;
          const Benchmark b = prepare_benchmark(c);
          const DualDomainModel pre = pretrained_model(c, b, seed);
          std::map<std::string, double> out;
          for (Method method : {Method::kTargetOnly, Method::kFinetune, Method::kAdapt}) {
            const auto t = train_method(c, b, method, &pre, c.flags, seed);
            out[method_name(method)] =
                evaluate(t.model, b.target_test, b.target_vocab, Domain::kTarget).overall;
          }
          return out;
        },
        py::arg("config"), py::arg("seed") = 0,
        "Trains target-only, fine-tune and adapt models for one seed and returns "
        "their target-test accuracies.");
}
