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
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/losses.hpp"
#include "madapt/model.hpp"
#include "madapt/train.hpp"

namespace madapt {

enum class Mode {
  kGenData,
  kTrainSource,
  kAdapt,
  kFinetune,
  kTargetOnly,
  kEval,
  kProbe,
  kAblate,
  kFractionStudy,
};
std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view s);  // throws ConfigError

/// a->b trains on the large domain as source; b->a swaps the roles.
enum class Direction { kForward, kReverse };

/// Everything one run needs. Every field has a default; loss weights and
/// schedule default to the published settings, network widths and data
/// sizes to the desk-scale benchmark.
struct ExperimentConfig {
  Mode mode = Mode::kAdapt;

  // Feature files. Empty paths mean "generate the synthetic benchmark" for
  // the experiment modes; the single-run modes require them.
  std::string source_train;
  std::string target_train;
  std::string source_test;
  std::string target_test;
  std::string init_checkpoint;  // starting parameters for adapt/finetune
  std::string checkpoint;       // model to read for eval/probe
  std::string out = "out";

  ModelConfig model;  // widths only; data-dependent sizes are derived
  std::size_t answer_cap = 50;
  LossWeights weights;
  KernelSpec kernel;
  Schedule schedule;
  std::uint64_t iterations = 2000;
  std::uint64_t pretrain_iterations = 2000;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  bool deterministic = true;
  OptimizerKind optimizer = OptimizerKind::kAdamax;
  AdaptFlags flags;
  double target_fraction = 1.0;
  Direction direction = Direction::kForward;
  std::size_t seeds = 5;          // experiment repetitions
  std::size_t ensemble_size = 3;  // top ablation rung

  GeneratorConfig generator;
  ShiftConfig shift;
  std::uint64_t data_seed = 0;
  std::size_t n_source = 20000;
  std::size_t n_target = 2000;
  std::size_t n_test = 2000;  // per domain

  bool operator==(const ExperimentConfig&) const = default;
};

/// Invalid key, value or combination. `line` is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Applies one key=value assignment; `line` is used in error messages.
void set_config_value(ExperimentConfig& config, std::string_view key,
                      std::string_view value, std::size_t line = 0);

/// Parses UTF-8 key=value lines. '#' starts a comment; blank lines are
/// skipped. Unknown keys and unparsable values throw ConfigError.
ExperimentConfig parse_config(std::string_view text);

/// Parses `text`, then applies `overrides` in order.
ExperimentConfig parse_config(
    std::string_view text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

/// Every key in a fixed order, doubles at round-trip precision.
std::string print_config(const ExperimentConfig& config);

/// Names of all accepted keys, in print order.
std::vector<std::string> config_keys();

/// Checks value ranges and the paths the mode needs.
void validate_config(const ExperimentConfig& config);

}  // namespace madapt
