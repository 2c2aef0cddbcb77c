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

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "madapt/config.hpp"
#include "madapt/data.hpp"
#include "madapt/metrics.hpp"
#include "madapt/model.hpp"
#include "madapt/train.hpp"

namespace madapt {

/// Train/test splits of both domains plus their answer vocabularies, with
/// roles already resolved for the configured direction.
struct Benchmark {
  Dataset source_train;
  Dataset target_train;
  Dataset source_test;
  Dataset target_test;
  AnswerVocab source_vocab;
  AnswerVocab target_vocab;
};

/// Synthetic pair from the generator keys (data_seed, n_source, n_target,
/// n_test, shift). Under b->a the two domains trade roles; sizes stay with
/// the roles, so the source split always has n_source samples.
Benchmark generate_benchmark(const ExperimentConfig& config);

/// Loads the four configured feature files, or generates the benchmark when
/// none is set. A partial set of paths is a ConfigError.
Benchmark prepare_benchmark(const ExperimentConfig& config);

/// Swaps the roles of the two domains and rebuilds the vocabularies.
Benchmark reversed(const Benchmark& b, std::size_t answer_cap);

/// Builds both vocabularies (capped) from the training splits.
void build_vocabularies(Benchmark& b, std::size_t answer_cap);

ModelConfig model_config_for(const ExperimentConfig& config, const Benchmark& b);
TrainOptions train_options(const ExperimentConfig& config,
                           std::uint64_t iterations, std::uint64_t seed);

/// Fresh model: source pretraining, then a target head seeded from the
/// source head for shared answers.
DualDomainModel pretrained_model(const ExperimentConfig& config,
                                 const Benchmark& b, std::uint64_t seed,
                                 RunRecord* record = nullptr);

enum class Method { kTargetOnly, kFinetune, kAdapt };

struct TrainedModel {
  DualDomainModel model;
  RunRecord run;
};

/// One training run on `target` (defaults to b.target_train). kFinetune and
/// kAdapt start from a copy of `pretrained`; kAdapt uses `flags`.
TrainedModel train_method(const ExperimentConfig& config, const Benchmark& b,
                          Method method, const DualDomainModel* pretrained,
                          const AdaptFlags& flags, std::uint64_t seed,
                          const Dataset* target = nullptr);

struct AblationRow {
  std::string name;
  std::vector<double> accuracy;  // per seed, overall target-test accuracy
  double mean = 0.0;
  double delta = 0.0;  // mean minus the previous row's mean; 0 on row one
};

/// Ladder: target only, fine-tune, +MMD on V and Q with both CE terms,
/// +joint MMD and GRL, +ensemble. Seeds run config.seed, config.seed+1, ...
std::vector<AblationRow> run_ablation(const ExperimentConfig& config,
                                      const Benchmark& b);
void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out);

inline constexpr double kFractions[] = {0.125, 0.25, 0.5, 1.0};

struct FractionCell {
  double fraction = 1.0;
  Method method = Method::kTargetOnly;
  std::vector<double> accuracy;  // per seed
  double mean = 0.0;
};

/// 4 fractions × {target only, fine-tune, adapt}, row-major by fraction.
std::vector<FractionCell> run_fraction_study(const ExperimentConfig& config,
                                             const Benchmark& b);
void write_fraction_csv(const std::vector<FractionCell>& cells, std::ostream& out);

const char* method_name(Method m);

}  // namespace madapt
