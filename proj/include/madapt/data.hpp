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
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "madapt/rng.hpp"

namespace madapt {

inline constexpr std::size_t kAnnotators = 10;
inline constexpr std::size_t kMaxQuestionLength = 24;
inline constexpr std::string_view kUnanswerable = "unanswerable";

enum class Category : std::uint8_t {
  kYesNo = 0,
  kNumber = 1,
  kOther = 2,
  kUnanswerable = 3,
};
inline constexpr std::size_t kCategoryCount = 4;
std::string_view category_name(Category c);

enum class DomainTag : std::uint8_t { kSource = 0, kTarget = 1 };

/// One image-question pair with its annotator answers. Token sequences hold
/// real tokens only (no padding); index 0 is reserved for padding.
struct Sample {
  std::vector<double> regions;  // K × d_v, row-major
  std::vector<double> grid;     // G × d_v, row-major
  std::vector<std::uint32_t> tokens;
  std::array<std::string, kAnnotators> answers;
  Category category = Category::kOther;
  DomainTag domain = DomainTag::kSource;

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::size_t regions_per_image = 0;  // K
  std::size_t grid_cells = 0;         // G
  std::size_t feature_dim = 0;        // d_v
  std::size_t token_vocab_size = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  /// Throws std::invalid_argument naming the first offending sample.
  void validate() const;
  bool operator==(const Dataset&) const = default;
};

/// Lowercased, whitespace-trimmed answer used for all matching.
std::string normalize_answer(std::string_view s);

/// Most frequent normalized annotator answer; ties go to the
/// lexicographically smallest string.
std::string majority_answer(const Sample& s);

/// Answer label space of one domain.
class AnswerVocab {
 public:
  static constexpr std::uint32_t kOutOfVocab =
      std::numeric_limits<std::uint32_t>::max();

  AnswerVocab() = default;
  AnswerVocab(std::vector<std::string> answers, std::vector<std::size_t> counts);

  std::size_t size() const { return answers_.size(); }
  const std::string& answer(std::uint32_t label) const {
    return answers_.at(label);
  }
  const std::vector<std::string>& answers() const { return answers_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::uint32_t label_of(std::string_view answer) const;
  /// Training label of a sample: its majority answer, or kOutOfVocab.
  std::uint32_t label_of(const Sample& s) const;

 private:
  std::vector<std::string> answers_;
  std::vector<std::size_t> counts_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Ranks majority answers by frequency (ties lexicographic) and keeps at
/// most `cap` of them.
AnswerVocab build_vocab(const std::vector<Sample>& samples, std::size_t cap);

/// Fixed structure shared by both domains of a synthetic benchmark.
struct GeneratorConfig {
  std::size_t regions_per_image = 8;
  std::size_t grid_cells = 4;
  std::size_t feature_dim = 64;
  std::size_t question_types = 5;  // type 0 yes/no, 1 number, rest other
  std::size_t concepts = 6;        // answers = question_types × concepts
  std::size_t type_words = 3;      // per question type
  std::size_t hint_words = 2;      // per concept
  std::size_t filler_words = 20;
  std::size_t min_question_length = 4;
  std::size_t max_question_length = 8;
  double hint_probability = 0.3;
  double prototype_scale = 1.0;
  double key_scale = 1.0;
  double feature_noise = 0.5;
  double grid_signal = 0.3;
  double annotator_agreement = 0.8;

  std::size_t answer_count() const { return question_types * concepts; }
  std::size_t token_vocab_size() const;
  bool operator==(const GeneratorConfig&) const = default;
};

/// How the target domain departs from the source domain.
struct ShiftConfig {
  double visual_shift = 1.0;      // per-dimension magnitude of the mean offset
  double text_shift = 0.5;        // probability a word uses its target synonym
  double covariance_scale = 1.5;  // target feature and noise scale
  double nuisance_scale = 0.0;    // per-grid-cell noise along nuisance_rank
  std::size_t nuisance_rank = 4;  //   random directions (target only)
  double label_skew = 1.0;        // Zipf exponent of the target label prior
  double overlap = 824.0 / 3000.0;
  double unanswerable_fraction = 0.2863;

  /// Zero shift, identical priors, full overlap, no unanswerable questions.
  static ShiftConfig none();
  void validate(std::size_t answers) const;
  bool operator==(const ShiftConfig&) const = default;
};

/// Which independent draw of the same two domains to produce.
enum class Split : std::uint64_t { kTrain = 0, kTest = 1 };

/// Deterministic given (config, shift, sizes, seed, split). The seed alone
/// fixes the shared structure, so train and test splits of one seed come
/// from the same pair of distributions.
std::pair<Dataset, Dataset> generate_domain_pair(const GeneratorConfig& config,
                                                 const ShiftConfig& shift,
                                                 std::size_t n_source,
                                                 std::size_t n_target,
                                                 std::uint64_t seed,
                                                 Split split = Split::kTrain);

/// Number of answer strings shared by both domains: floor(overlap · answers).
std::size_t shared_answer_count(const ShiftConfig& shift, std::size_t answers);

/// Seeded subset stratified by category, in original order. The size is
/// round(n · fraction), apportioned across categories by largest remainder.
Dataset split_fraction(const Dataset& data, double fraction, std::uint64_t seed);

/// Shuffled index batches for one epoch; the final short batch is kept.
std::vector<std::vector<std::size_t>> batch_iter(std::size_t n,
                                                 std::size_t batch_size,
                                                 std::uint64_t seed,
                                                 std::uint64_t epoch);

/// Endless batch source that reshuffles at each epoch boundary.
class BatchStream {
 public:
  BatchStream(std::size_t n, std::size_t batch_size, std::uint64_t seed);
  const std::vector<std::size_t>& next();
  std::uint64_t epoch() const { return epoch_; }

 private:
  std::size_t n_, batch_size_;
  std::uint64_t seed_, epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<std::vector<std::size_t>> batches_;
};

/// Dense tensors for a set of samples. Questions are right-padded with 0 to
/// the longest question in the batch.
struct MultiModalBatch {
  std::size_t size = 0;
  std::size_t regions_per_image = 0;
  std::size_t grid_cells = 0;
  std::size_t feature_dim = 0;
  std::size_t max_length = 0;
  std::vector<double> regions;        // (size·K) × d_v
  std::vector<double> grid;           // (size·G) × d_v
  std::vector<std::uint32_t> tokens;  // size × max_length
  std::vector<std::size_t> lengths;
  std::vector<std::uint32_t> labels;  // kOutOfVocab where unlabeled
  std::vector<std::size_t> indices;   // positions in the source dataset
};

MultiModalBatch make_batch(const Dataset& data,
                           const std::vector<std::size_t>& indices,
                           const AnswerVocab* vocab);

}  // namespace madapt
