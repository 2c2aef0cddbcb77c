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
#include <utility>
#include <vector>

#include "madapt/rng.hpp"
#include "madapt/tensor.hpp"

namespace madapt {

struct NamedParam {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedParam>;

/// Trainable leaf with uniform(−a, a), a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(std::size_t fan_out, std::size_t fan_in, Rng& rng);

/// y = x Wᵀ + b for x of shape [batch × in].
struct LinearLayer {
  Tensor weight;  // [out × in]
  Tensor bias;    // [out]

  LinearLayer() = default;
  LinearLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng);
  LinearLayer(Tensor w, Tensor b);

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Word embedding table. Row 0 is padding: initialised to zero and never
/// updated, because its gradient is dropped in the lookup.
struct EmbeddingTable {
  static constexpr std::uint32_t kPadding = 0;
  Tensor rows;  // [vocab × dim]

  EmbeddingTable() = default;
  EmbeddingTable(std::size_t vocab_size, std::size_t dim, Rng& rng);

  std::size_t vocab_size() const { return rows.rows(); }
  std::size_t dim() const { return rows.cols(); }
  Tensor lookup(std::span<const std::uint32_t> tokens) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Cho-style GRU:
///   z  = σ(x W_zᵀ + h U_zᵀ + b_z)
///   r  = σ(x W_rᵀ + h U_rᵀ + b_r)
///   h̃  = tanh(x W_hᵀ + (r ⊙ h) U_hᵀ + b_h)
///   h' = (1 − z) ⊙ h + z ⊙ h̃
struct GruCell {
  struct Gate {
    Tensor input;      // [hidden × input_dim]
    Tensor recurrent;  // [hidden × hidden]
    Tensor bias;       // [hidden]
  };
  Gate update, reset, candidate;

  GruCell() = default;
  GruCell(std::size_t input_dim, std::size_t hidden, Rng& rng);

  std::size_t hidden() const { return update.recurrent.rows(); }
  std::size_t input_dim() const { return update.input.cols(); }
  /// x: [batch × input_dim], h_prev: [batch × hidden].
  Tensor step(const Tensor& x, const Tensor& h_prev) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

/// Additive top-down attention over K regions:
///   score_i = wᵀ tanh(W_q q + W_k v_i),  weights = softmax(score).
struct AttentionHead {
  LinearLayer query;  // d_q -> att
  LinearLayer key;    // d_v -> att
  Tensor score;       // [att]

  AttentionHead() = default;
  AttentionHead(std::size_t query_dim, std::size_t value_dim,
                std::size_t att_dim, Rng& rng);

  struct Result {
    Tensor weights;  // [batch × K]
    Tensor pooled;   // [batch × d_v]
  };
  /// q: [batch × d_q]; regions: [(batch·K) × d_v], sample-major.
  Result pool(const Tensor& q, const Tensor& regions, std::size_t k) const;
  /// Region scores before the softmax, [batch × K].
  Tensor scores(const Tensor& q, const Tensor& regions, std::size_t k) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

enum class Activation { kNone, kTanh, kSigmoid };

Tensor activate(const Tensor& x, Activation act);

struct Mlp {
  std::vector<std::pair<LinearLayer, Activation>> layers;

  Mlp() = default;
  /// dims = {in, hidden..., out}; `hidden_act` after every layer but the
  /// last, `out_act` after the last.
  Mlp(const std::vector<std::size_t>& dims, Activation hidden_act,
      Activation out_act, Rng& rng);

  Tensor forward(const Tensor& x) const;
  std::size_t out_dim(std::size_t in_dim) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

}  // namespace madapt
