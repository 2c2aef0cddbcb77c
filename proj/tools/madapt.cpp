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

// madapt <mode> [--config FILE] [--out DIR] [--key value ...]

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "madapt/checkpoint.hpp"
#include "madapt/config.hpp"
#include "madapt/experiments.hpp"
#include "madapt/feature_file.hpp"
#include "madapt/metrics.hpp"

namespace fs = std::filesystem;
using namespace madapt;

namespace {

enum ExitCode { kOk = 0, kConfigExit = 2, kDataExit = 3, kDivergenceExit = 4 };

// Raised for unusable inputs that are not config syntax problems.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Turns "--key value" and "--key=value" pairs into overrides.
std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) {
      throw ConfigError("unexpected argument '" + a + "'", 0);
    }
    std::string key = a.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= args.size()) throw ConfigError("--" + key + " needs a value", 0);
      value = args[++i];
    }
    for (auto& ch : key) {
      if (ch == '-') ch = '_';
    }
    out.emplace_back(key, value);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  fn(out);
  if (!out) throw DataError("cannot write " + path.string());
}

Dataset load_or_empty(const std::string& path) {
  return path.empty() ? Dataset{} : load_feature_file(path);
}

// Single-run modes read only the paths they need. A missing training split
// borrows the other one so the model geometry and both heads are defined.
Benchmark load_inputs(const ExperimentConfig& c) {
  Benchmark b;
  b.source_train = load_or_empty(c.source_train);
  b.target_train = load_or_empty(c.target_train);
  b.source_test = load_or_empty(c.source_test);
  b.target_test = load_or_empty(c.target_test);
  if (c.direction == Direction::kReverse) {
    std::swap(b.source_train, b.target_train);
    std::swap(b.source_test, b.target_test);
  }
  if (b.source_train.size() == 0 && b.target_train.size() == 0) {
    throw DataError("no training data");
  }
  if (b.source_train.size() == 0) b.source_train = b.target_train;
  if (b.target_train.size() == 0) b.target_train = b.source_train;
  build_vocabularies(b, c.answer_cap);
  return b;
}

void save_run(const fs::path& out, const RunRecord& run) {
  write_stream(out / "run.csv", [&](std::ostream& s) { run.write_csv(s); });
}

void save_eval(const fs::path& out, const EvalReport& report) {
  write_stream(out / "eval.csv", [&](std::ostream& s) { report.write_csv(s); });
  std::printf("accuracy %.4f on %zu samples\n", report.overall, report.samples);
}

DualDomainModel initial_model(const ExperimentConfig& c, const Benchmark& b) {
  const ModelConfig mc = model_config_for(c, b);
  if (!c.init_checkpoint.empty()) {
    return load_checkpoint(c.init_checkpoint, mc).model;
  }
  std::printf("pretraining on %zu source samples\n", b.source_train.size());
  return pretrained_model(c, b, c.seed);
}

const Dataset& target_subset(const ExperimentConfig& c, const Benchmark& b,
                             Dataset& storage) {
  if (c.target_fraction >= 1.0) return b.target_train;
  storage = split_fraction(b.target_train, c.target_fraction, c.seed);
  return storage;
}

void run_gen_data(const ExperimentConfig& c, const fs::path& out) {
  ExperimentConfig g = c;
  g.source_train = g.target_train = g.source_test = g.target_test = "";
  const Benchmark b = generate_benchmark(g);
  const std::pair<const char*, const Dataset*> files[] = {
      {"source_train", &b.source_train},
      {"target_train", &b.target_train},
      {"source_test", &b.source_test},
      {"target_test", &b.target_test},
  };
  std::string manifest;
  for (const auto& [key, data] : files) {
    const fs::path path = fs::absolute(out / (std::string(key) + ".mmf"));
    save_feature_file(*data, path);
    manifest += std::string(key) + " = " + path.string() + "\n";
    std::printf("%-12s %6zu samples  %s\n", key, data->size(), path.c_str());
  }
  // Roles are already resolved in the files, so later runs read them a->b.
  manifest += "direction = a->b\n";
  write_file(out / "manifest.cfg", manifest);
}

void run_single(const ExperimentConfig& c, const fs::path& out,
                const std::string& echo) {
  const Benchmark b = load_inputs(c);
  Dataset subset;
  const Dataset& target = target_subset(c, b, subset);
  const TrainOptions opts = train_options(c, c.iterations, c.seed);
  DualDomainModel model(model_config_for(c, b), c.seed);
  RunRecord run;
  Domain head = Domain::kTarget;
  const Dataset* test = &b.target_test;

  switch (c.mode) {
    case Mode::kTrainSource:
      run = pretrain_source(model, b.source_train, b.source_vocab,
                            train_options(c, c.pretrain_iterations, c.seed));
      model.init_target_head(b.source_vocab.answers(), b.target_vocab.answers(),
                             c.seed);
      head = Domain::kSource;
      test = &b.source_test;
      break;
    case Mode::kTargetOnly:
      run = train_target_only(model, target, b.target_vocab, opts);
      break;
    case Mode::kFinetune:
      model = initial_model(c, b);
      run = finetune(model, target, b.target_vocab, opts);
      break;
    case Mode::kAdapt:
      model = initial_model(c, b);
      run = adapt(model, b.source_train, b.source_vocab, target, b.target_vocab,
                  c.weights, c.kernel, c.flags, opts);
      break;
    default:
      throw std::logic_error("not a training mode");
  }
  run.config_echo = echo;
  save_run(out, run);
  save_checkpoint(model, echo, out / "model.ckpt");
  if (test->size() > 0) {
    const AnswerVocab& vocab = head == Domain::kSource ? b.source_vocab : b.target_vocab;
    save_eval(out, evaluate(model, *test, vocab, head));
  }
}

void run_eval(const ExperimentConfig& c, const fs::path& out) {
  const Benchmark b = load_inputs(c);
  if (b.target_test.size() == 0) throw DataError("target_test is empty");
  const auto loaded = load_checkpoint(c.checkpoint, model_config_for(c, b));
  save_eval(out, evaluate(loaded.model, b.target_test, b.target_vocab,
                          Domain::kTarget));
}

void run_probe(const ExperimentConfig& c, const fs::path& out) {
  const Benchmark b = load_inputs(c);
  const auto loaded = load_checkpoint(c.checkpoint, model_config_for(c, b));
  ProbeOptions po;
  po.seed = c.seed;
  const ProbeResult r = probe_domain_gap(embed_dataset(loaded.model, b.source_test),
                                         embed_dataset(loaded.model, b.target_test),
                                         c.kernel, po);
  char buf[128];
  std::snprintf(buf, sizeof buf, "mmd_sq,probe_accuracy\n%.17g,%.17g\n", r.mmd_sq,
                r.accuracy);
  write_file(out / "probe.csv", buf);
  std::printf("probe accuracy %.4f, mmd^2 %.6f\n", r.accuracy, r.mmd_sq);
}

void run_ablate(const ExperimentConfig& c, const fs::path& out) {
  const Benchmark b = prepare_benchmark(c);
  const auto rows = run_ablation(c, b);
  write_stream(out / "ablation.csv",
               [&](std::ostream& s) { write_ablation_csv(rows, s); });
  for (const auto& r : rows) {
    std::printf("%-28s %.4f  %+.4f\n", r.name.c_str(), r.mean, r.delta);
  }
}

void run_fractions(const ExperimentConfig& c, const fs::path& out) {
  const Benchmark b = prepare_benchmark(c);
  const auto cells = run_fraction_study(c, b);
  write_stream(out / "fraction.csv",
               [&](std::ostream& s) { write_fraction_csv(cells, s); });
  for (const auto& cell : cells) {
    std::printf("%-6g %-12s %.4f\n", cell.fraction, method_name(cell.method),
                cell.mean);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Multi-modal domain adaptation engine"};
  std::string mode_text, config_path, out_dir;
  app.add_option("mode", mode_text,
                 "gen-data | train-source | adapt | finetune | target-only | "
                 "eval | probe | ablate | fraction-study")
      ->required();
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--out", out_dir, "output directory (overrides config 'out')");
  app.allow_extras();
  app.footer("Any config key can be overridden with --key value.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigExit;
  }

  ExperimentConfig c;
  try {
    const std::string text = config_path.empty() ? "" : read_text(config_path);
    auto overrides = parse_overrides(app.remaining());
    overrides.insert(overrides.begin(), {"mode", mode_text});
    if (!out_dir.empty()) overrides.emplace_back("out", out_dir);
    c = parse_config(text, overrides);
    validate_config(c);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  }

  try {
    const fs::path out = c.out;
    fs::create_directories(out);
    const std::string echo = print_config(c);
    write_file(out / "config.echo", echo);
    switch (c.mode) {
      case Mode::kGenData:
        run_gen_data(c, out);
        break;
      case Mode::kTrainSource:
      case Mode::kAdapt:
      case Mode::kFinetune:
      case Mode::kTargetOnly:
        run_single(c, out, echo);
        break;
      case Mode::kEval:
        run_eval(c, out);
        break;
      case Mode::kProbe:
        run_probe(c, out);
        break;
      case Mode::kAblate:
        run_ablate(c, out);
        break;
      case Mode::kFractionStudy:
        run_fractions(c, out);
        break;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return kDivergenceExit;
  } catch (const std::exception& e) {
    // Unreadable files, corrupt checkpoints, shape mismatches with the data.
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kDataExit;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
