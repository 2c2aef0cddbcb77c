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

#include "madapt/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <utility>

#include "madapt/feature_file.hpp"

namespace madapt {

namespace {

constexpr std::uint64_t kEnsembleSeedStride = 1000003;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::kTargetOnly:
      return "target-only";
    case Method::kFinetune:
      return "finetune";
    case Method::kAdapt:
      return "adapt";
  }
  return "unknown";
}

void build_vocabularies(Benchmark& b, std::size_t answer_cap) {
  b.source_vocab = build_vocab(b.source_train.samples, answer_cap);
  b.target_vocab = build_vocab(b.target_train.samples, answer_cap);
}

Benchmark reversed(const Benchmark& b, std::size_t answer_cap) {
  Benchmark r;
  r.source_train = b.target_train;
  r.target_train = b.source_train;
  r.source_test = b.target_test;
  r.target_test = b.source_test;
  build_vocabularies(r, answer_cap);
  return r;
}

Benchmark generate_benchmark(const ExperimentConfig& c) {
  // Under b->a the generator's second domain becomes the source, and the
  // sizes follow the roles: the source split still gets n_source samples.
  const bool rev = c.direction == Direction::kReverse;
  Benchmark b;
  std::tie(b.source_train, b.target_train) = generate_domain_pair(
      c.generator, c.shift, rev ? c.n_target : c.n_source,
      rev ? c.n_source : c.n_target, c.data_seed, Split::kTrain);
  std::tie(b.source_test, b.target_test) = generate_domain_pair(
      c.generator, c.shift, c.n_test, c.n_test, c.data_seed, Split::kTest);
  if (rev) return reversed(b, c.answer_cap);
  build_vocabularies(b, c.answer_cap);
  return b;
}

Benchmark prepare_benchmark(const ExperimentConfig& c) {
  const std::string* paths[] = {&c.source_train, &c.target_train,
                                &c.source_test, &c.target_test};
  const auto set = std::count_if(std::begin(paths), std::end(paths),
                                 [](const std::string* p) { return !p->empty(); });
  if (set == 0) return generate_benchmark(c);
  if (set != 4) {
    throw ConfigError(
        "set all of source_train, target_train, source_test, target_test or none",
        0);
  }
  Benchmark b;
  b.source_train = load_feature_file(c.source_train);
  b.target_train = load_feature_file(c.target_train);
  b.source_test = load_feature_file(c.source_test);
  b.target_test = load_feature_file(c.target_test);
  if (c.direction == Direction::kReverse) return reversed(b, c.answer_cap);
  build_vocabularies(b, c.answer_cap);
  return b;
}

ModelConfig model_config_for(const ExperimentConfig& c, const Benchmark& b) {
  const Dataset& s = b.source_train;
  const Dataset& t = b.target_train;
  if (s.regions_per_image != t.regions_per_image || s.grid_cells != t.grid_cells ||
      s.feature_dim != t.feature_dim) {
    throw std::invalid_argument("source and target feature geometry differ");
  }
  ModelConfig m = c.model;
  m.token_vocab = std::max(s.token_vocab_size, t.token_vocab_size);
  m.feature_dim = s.feature_dim;
  m.regions = s.regions_per_image;
  m.grid_cells = s.grid_cells;
  m.source_answers = b.source_vocab.size();
  m.target_answers = b.target_vocab.size();
  return m;
}

TrainOptions train_options(const ExperimentConfig& c, std::uint64_t iterations,
                           std::uint64_t seed) {
  TrainOptions o;
  o.schedule = c.schedule;
  o.iterations = iterations;
  o.batch_size = c.batch_size;
  o.seed = seed;
  o.optimizer.kind = c.optimizer;
  return o;
}

DualDomainModel pretrained_model(const ExperimentConfig& c, const Benchmark& b,
                                 std::uint64_t seed, RunRecord* record) {
  DualDomainModel model(model_config_for(c, b), seed);
  RunRecord run = pretrain_source(model, b.source_train, b.source_vocab,
                                  train_options(c, c.pretrain_iterations, seed));
  model.init_target_head(b.source_vocab.answers(), b.target_vocab.answers(), seed);
  if (record) *record = std::move(run);
  return model;
}

TrainedModel train_method(const ExperimentConfig& c, const Benchmark& b,
                          Method method, const DualDomainModel* pretrained,
                          const AdaptFlags& flags, std::uint64_t seed,
                          const Dataset* target) {
  const Dataset& tgt = target ? *target : b.target_train;
  const TrainOptions opts = train_options(c, c.iterations, seed);
  if (method == Method::kTargetOnly) {
    TrainedModel t{DualDomainModel(model_config_for(c, b), seed), {}};
    t.run = train_target_only(t.model, tgt, b.target_vocab, opts);
    return t;
  }
  if (!pretrained) {
    throw std::invalid_argument(std::string(method_name(method)) +
                                " needs a pretrained model");
  }
  TrainedModel t{pretrained->deep_copy(), {}};
  if (method == Method::kFinetune) {
    t.run = finetune(t.model, tgt, b.target_vocab, opts);
  } else {
    t.run = adapt(t.model, b.source_train, b.source_vocab, tgt, b.target_vocab,
                  c.weights, c.kernel, flags, opts);
  }
  return t;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& c, const Benchmark& b) {
  std::vector<AblationRow> rows = {
      {"target only", {}, 0, 0},
      {"fine-tune", {}, 0, 0},
      {"+ MMD on V and Q, CLS", {}, 0, 0},
      {"+ MMD, GRL on joint", {}, 0, 0},
      {"+ ensemble of " + std::to_string(c.ensemble_size) + " models", {}, 0, 0},
  };
  const AdaptFlags modal{true, false, false, true};
  const AdaptFlags full{true, true, true, true};
  for (std::size_t k = 0; k < c.seeds; ++k) {
    const std::uint64_t seed = c.seed + k;
    auto acc = [&](const DualDomainModel& m) {
      return evaluate(m, b.target_test, b.target_vocab, Domain::kTarget).overall;
    };
    rows[0].accuracy.push_back(
        acc(train_method(c, b, Method::kTargetOnly, nullptr, {}, seed).model));
    const DualDomainModel pre = pretrained_model(c, b, seed);
    rows[1].accuracy.push_back(
        acc(train_method(c, b, Method::kFinetune, &pre, {}, seed).model));
    rows[2].accuracy.push_back(
        acc(train_method(c, b, Method::kAdapt, &pre, modal, seed).model));
    std::vector<DualDomainModel> members;
    members.push_back(train_method(c, b, Method::kAdapt, &pre, full, seed).model);
    rows[3].accuracy.push_back(acc(members.front()));
    for (std::size_t e = 1; e < c.ensemble_size; ++e) {
      members.push_back(train_method(c, b, Method::kAdapt, &pre, full,
                                     seed + e * kEnsembleSeedStride)
                            .model);
    }
    std::vector<const DualDomainModel*> ptrs;
    for (const auto& m : members) ptrs.push_back(&m);
    rows[4].accuracy.push_back(
        evaluate_ensemble(ptrs, b.target_test, b.target_vocab, Domain::kTarget)
            .overall);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].mean = mean_of(rows[i].accuracy);
    rows[i].delta = i == 0 ? 0.0 : rows[i].mean - rows[i - 1].mean;
  }
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << "method,accuracy,delta";
  const std::size_t seeds = rows.empty() ? 0 : rows.front().accuracy.size();
  for (std::size_t k = 0; k < seeds; ++k) out << ",seed_" << k;
  out << '\n';
  char buf[64];
  for (const auto& r : rows) {
    out << r.name;
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.mean, r.delta);
    out << buf;
    for (double a : r.accuracy) {
      std::snprintf(buf, sizeof buf, ",%.17g", a);
      out << buf;
    }
    out << '\n';
  }
}

std::vector<FractionCell> run_fraction_study(const ExperimentConfig& c,
                                             const Benchmark& b) {
  std::vector<FractionCell> cells;
  for (double f : kFractions) {
    for (Method m : {Method::kTargetOnly, Method::kFinetune, Method::kAdapt}) {
      cells.push_back({f, m, {}, 0.0});
    }
  }
  const AdaptFlags full{true, true, true, true};
  for (std::size_t k = 0; k < c.seeds; ++k) {
    const std::uint64_t seed = c.seed + k;
    const DualDomainModel pre = pretrained_model(c, b, seed);
    for (auto& cell : cells) {
      const Dataset subset = split_fraction(b.target_train, cell.fraction, seed);
      const auto t = train_method(c, b, cell.method, &pre, full, seed, &subset);
      cell.accuracy.push_back(
          evaluate(t.model, b.target_test, b.target_vocab, Domain::kTarget).overall);
    }
  }
  for (auto& cell : cells) cell.mean = mean_of(cell.accuracy);
  return cells;
}

void write_fraction_csv(const std::vector<FractionCell>& cells, std::ostream& out) {
  out << "fraction,target_only,finetune,adapt\n";
  char buf[64];
  for (std::size_t i = 0; i + 2 < cells.size(); i += 3) {
    std::snprintf(buf, sizeof buf, "%g", cells[i].fraction);
    out << buf;
    for (std::size_t j = 0; j < 3; ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", cells[i + j].mean);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace madapt
