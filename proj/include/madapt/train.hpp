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
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/layers.hpp"
#include "madapt/losses.hpp"
#include "madapt/model.hpp"

namespace madapt {

/// Linear warm-up from `warmup_start` to `warmup_end` over `warmup_iters`,
/// then step decay by `decay` every `decay_period` iterations.
struct Schedule {
  double warmup_start = 0.001;
  double warmup_end = 0.01;
  std::uint64_t warmup_iters = 2000;
  double decay = 0.15;
  std::uint64_t decay_period = 4000;

  void validate() const;
  bool operator==(const Schedule&) const = default;
};

double lr_at(const Schedule& schedule, std::uint64_t iter);

enum class OptimizerKind { kAdamax, kMomentumSgd };

/// Adamax (infinity-norm second moment) or momentum SGD. Parameters whose
/// gradient is entirely zero this step were not reached by the loss and are
/// left untouched, moments included.
class Optimizer {
 public:
  struct Options {
    OptimizerKind kind = OptimizerKind::kAdamax;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double momentum = 0.9;
  };

  Optimizer(ParamList params, Options options);
  Optimizer(ParamList params) : Optimizer(std::move(params), Options{}) {}

  void zero_grad();
  void step(double lr);
  std::uint64_t steps() const { return steps_; }

 private:
  struct Slot {
    Tensor param;
    std::vector<double> first;
    std::vector<double> second;
    std::uint64_t t = 0;
  };
  std::vector<Slot> slots_;
  Options options_;
  std::uint64_t steps_ = 0;
};

/// One row of run.csv.
struct IterationRecord {
  std::uint64_t iter = 0;
  double lr = 0.0;
  LossBreakdown losses;
};

struct EvalPoint {
  std::uint64_t iter = 0;  // iterations completed
  double accuracy = 0.0;
};

struct ProbePoint {
  std::uint64_t iter = 0;
  double probe_accuracy = 0.0;
  double mmd_sq = 0.0;
};

struct RunRecord {
  std::vector<IterationRecord> iterations;
  std::vector<EvalPoint> evaluations;
  std::vector<ProbePoint> probes;
  std::uint64_t seed = 0;
  std::string config_echo;

  static const char* csv_header();
  void write_csv(std::ostream& out) const;
};

/// Non-finite loss or gradient during training.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::uint64_t iter)
      : std::runtime_error(what + " at iteration " + std::to_string(iter)),
        iter_(iter) {}
  std::uint64_t iteration() const { return iter_; }

 private:
  std::uint64_t iter_;
};

struct TrainOptions {
  Schedule schedule;
  std::uint64_t iterations = 0;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  Optimizer::Options optimizer;
  /// Called after every `callback_every` completed iterations with the
  /// number completed so far; may append to the record (e.g. evaluations).
  std::uint64_t callback_every = 0;
  std::function<void(std::uint64_t done, RunRecord& record)> callback;
};

/// Which adaptation terms are active (ablation ladder switches).
struct AdaptFlags {
  bool multimodal_mmd = true;
  bool joint_mmd = true;
  bool discriminator = true;
  bool source_classification = true;

  static AdaptFlags none() { return {false, false, false, false}; }
  bool operator==(const AdaptFlags&) const = default;
};

/// Source CE only, source head. Divergence raises DivergenceError.
RunRecord pretrain_source(DualDomainModel& model, const Dataset& source,
                          const AnswerVocab& source_vocab,
                          const TrainOptions& options);

/// Full objective with gradient reversal on the discriminator input. Both
/// batches come from independent seeded streams; the target stream is the
/// same one finetune() draws from. The target head must already match
/// target_vocab (see DualDomainModel::init_target_head).
RunRecord adapt(DualDomainModel& model, const Dataset& source,
                const AnswerVocab& source_vocab, const Dataset& target,
                const AnswerVocab& target_vocab, const LossWeights& weights,
                const KernelSpec& kernel, const AdaptFlags& flags,
                const TrainOptions& options);

/// Target CE only, continuing from the given (pretrained) parameters.
RunRecord finetune(DualDomainModel& model, const Dataset& target,
                   const AnswerVocab& target_vocab, const TrainOptions& options);

/// Target CE only from a freshly initialised model.
RunRecord train_target_only(DualDomainModel& model, const Dataset& target,
                            const AnswerVocab& target_vocab,
                            const TrainOptions& options);

}  // namespace madapt
