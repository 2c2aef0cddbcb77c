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

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/losses.hpp"
#include "madapt/model.hpp"

namespace madapt {

/// Leave-one-out VQA accuracy: the mean over the ten 9-annotator subsets of
/// min(matches / 3, 1). Matching is exact after normalize_answer.
/// Throws std::invalid_argument unless exactly 10 answers are given.
double vqa_accuracy(std::string_view predicted,
                    std::span<const std::string> answers);

struct EvalReport {
  double overall = 0.0;
  double yes_no = 0.0;
  double number = 0.0;
  double other = 0.0;
  /// Accuracy on samples tagged unanswerable (answering "unanswerable").
  double answerable = 0.0;
  std::size_t samples = 0;
  std::array<std::size_t, kCategoryCount> counts{};

  static const char* csv_header();
  /// One row per category, then the overall row.
  void write_csv(std::ostream& out) const;
  bool operator==(const EvalReport&) const = default;
};

/// Aggregates per-sample accuracies by category tag.
EvalReport summarize(const Dataset& data, std::span<const double> accuracy);

/// Batched forward passes without graph recording; answers come from
/// `vocab` (the label space of the chosen head).
EvalReport evaluate(const DualDomainModel& model, const Dataset& data,
                    const AnswerVocab& vocab, Domain domain,
                    std::size_t batch_size = 256);

/// Argmax of the mean softmax of several [batch × C] logit tensors; ties
/// resolve to the lowest index.
std::vector<std::uint32_t> ensemble_predict(std::span<const Tensor> logits);

/// Ensemble of models sharing one answer vocabulary.
std::vector<std::uint32_t> ensemble_predict(
    std::span<const DualDomainModel* const> models,
    const MultiModalBatch& batch, Domain domain);

EvalReport evaluate_ensemble(std::span<const DualDomainModel* const> models,
                             const Dataset& data, const AnswerVocab& vocab,
                             Domain domain, std::size_t batch_size = 256);

/// Joint embeddings e of every sample, [n × d_e], without graph history.
Tensor embed_dataset(const DualDomainModel& model, const Dataset& data,
                     std::size_t batch_size = 256);

struct ProbeOptions {
  std::size_t max_per_domain = 1000;  // balanced subsample cap
  double train_fraction = 0.7;
  std::size_t hidden = 32;
  std::size_t epochs = 300;  // full-batch Adamax steps
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double mmd_sq = 0.0;
  double accuracy = 0.0;  // held-out domain classification accuracy
};

/// Trains a fresh one-hidden-layer domain classifier on standardized pooled
/// features (equal counts per domain) and reports its held-out accuracy
/// together with the squared MMD of the same subsample.
ProbeResult probe_domain_gap(const Tensor& features_s, const Tensor& features_t,
                             const KernelSpec& kernel,
                             const ProbeOptions& options = {});

}  // namespace madapt
