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
#include <span>
#include <string>
#include <vector>

#include "madapt/data.hpp"
#include "madapt/layers.hpp"
#include "madapt/rng.hpp"
#include "madapt/tensor.hpp"

namespace madapt {

/// Network dimensions. Defaults are the desk-scale benchmark sizes; see
/// paper_scale() for the full-size configuration.
struct ModelConfig {
  std::size_t token_vocab = 0;  // from the data
  std::size_t embed_dim = 64;
  std::size_t question_dim = 128;   // d_q
  std::size_t feature_dim = 64;     // d_v
  std::size_t regions = 8;          // K
  std::size_t grid_cells = 4;       // G
  std::size_t attention_dim = 64;
  std::size_t grid_dim = 64;        // grid+question projection width
  std::size_t fusion_dim = 128;     // d_e
  std::size_t classifier_hidden = 128;
  std::size_t discriminator_hidden = 64;
  std::size_t source_answers = 0;   // from the vocabularies
  std::size_t target_answers = 0;

  static ModelConfig paper_scale();
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

enum class Domain { kSource, kTarget };

/// Encoder outputs for one batch.
struct Encoded {
  Tensor q;  // [batch × d_q]
  Tensor v;  // [batch × (d_v + grid_dim)]
  Tensor e;  // [batch × d_e]
  Tensor attention;  // [batch × K]
};

/// Dual-domain network. The question and visual encoders and the fusion
/// projections are stored once and used for both domains; each domain has
/// its own classifier head, and a discriminator reads the joint embedding
/// through a gradient reversal node.
class DualDomainModel {
 public:
  DualDomainModel() = default;
  DualDomainModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  /// tokens: [batch × max_len] right-padded with 0. Returns h at each
  /// sample's last real token. Throws on an all-padding question.
  Tensor encode_question(std::span<const std::uint32_t> tokens,
                         std::size_t batch, std::size_t max_len) const;
  /// regions: [(batch·K) × d_v], grid: [(batch·G) × d_v].
  Tensor encode_visual(const Tensor& q, const Tensor& regions,
                       const Tensor& grid, Tensor* attention = nullptr) const;
  /// e = P_q(q) ⊙ P_v(v)
  Tensor fuse(const Tensor& q, const Tensor& v) const;
  Tensor classify(const Tensor& e, Domain domain) const;
  /// Source-domain probability, σ(MLP(grl(e, coefficient))), [batch × 1].
  Tensor discriminate(const Tensor& e, double coefficient) const;

  Encoded encode(const MultiModalBatch& batch) const;

  /// All trainable tensors with stable names, grouped by prefix:
  /// question.*, visual.*, fusion.*, classifier.source.*,
  /// classifier.target.*, discriminator.*
  ParamList parameters() const;
  std::size_t parameter_count() const;

  /// Replaces the target head: rows for answers present in both vocabularies
  /// are copied from the source head, all other rows are freshly drawn.
  void init_target_head(const std::vector<std::string>& source_answers,
                        const std::vector<std::string>& target_answers,
                        std::uint64_t seed);

  /// Copy with independent parameter storage.
  DualDomainModel deep_copy() const;

  // Exposed for tests that build expectations from the parts.
  EmbeddingTable embedding;
  GruCell gru;
  AttentionHead attention;
  LinearLayer grid_projection;
  LinearLayer fuse_question;
  LinearLayer fuse_visual;
  Mlp source_head;
  Mlp target_head;
  Mlp discriminator;

 private:
  ModelConfig config_;
};

/// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Argmax of each row of a [batch × C] logit tensor.
std::vector<std::uint32_t> predict_answer(const Tensor& logits);

}  // namespace madapt
