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

#include "madapt/layers.hpp"

#include <cmath>

#include "madapt/ops.hpp"

namespace madapt {

Tensor xavier_uniform(std::size_t fan_out, std::size_t fan_in, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> w(fan_out * fan_in);
  for (auto& x : w) x = rng.uniform(-a, a);
  return Tensor::from({fan_out, fan_in}, std::move(w), true);
}

LinearLayer::LinearLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : weight(xavier_uniform(out_dim, in_dim, rng)),
      bias(Tensor::zeros({out_dim}, true)) {}

LinearLayer::LinearLayer(Tensor w, Tensor b)
    : weight(std::move(w)), bias(std::move(b)) {
  if (weight.rank() != 2 || bias.rank() != 1 ||
      weight.rows() != bias.numel()) {
    throw ShapeError("LinearLayer: weight " + shape_str(weight.shape()) +
                     " does not match bias " + shape_str(bias.shape()));
  }
}

Tensor LinearLayer::forward(const Tensor& x) const {
  if (x.cols() != in_dim()) {
    throw ShapeError("linear: input " + shape_str(x.shape()) +
                     " does not match weight " + shape_str(weight.shape()));
  }
  return add(matmul_nt(x, weight), bias);
}

void LinearLayer::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

EmbeddingTable::EmbeddingTable(std::size_t vocab_size, std::size_t dim,
                               Rng& rng) {
  if (vocab_size < 2) {
    throw std::invalid_argument("EmbeddingTable: need padding plus one token");
  }
  std::vector<double> w(vocab_size * dim, 0.0);
  for (std::size_t i = dim; i < w.size(); ++i) w[i] = rng.normal(0.0, 0.1);
  rows = Tensor::from({vocab_size, dim}, std::move(w), true);
}

Tensor EmbeddingTable::lookup(std::span<const std::uint32_t> tokens) const {
  return gather_rows(rows, tokens, kPadding);
}

void EmbeddingTable::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".rows", rows});
}

GruCell::GruCell(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  for (Gate* g : {&update, &reset, &candidate}) {
    g->input = xavier_uniform(hidden, input_dim, rng);
    g->recurrent = xavier_uniform(hidden, hidden, rng);
    g->bias = Tensor::zeros({hidden}, true);
  }
}

Tensor GruCell::step(const Tensor& x, const Tensor& h_prev) const {
  if (x.cols() != input_dim() || h_prev.cols() != hidden() ||
      x.rows() != h_prev.rows()) {
    throw ShapeError("gru_step: x " + shape_str(x.shape()) + ", h " +
                     shape_str(h_prev.shape()) + " for cell with input " +
                     std::to_string(input_dim()) + ", hidden " +
                     std::to_string(hidden()));
  }
  auto gate = [&](const Gate& g, const Tensor& h) {
    return add(add(matmul_nt(x, g.input), matmul_nt(h, g.recurrent)), g.bias);
  };
  const Tensor z = sigmoid(gate(update, h_prev));
  const Tensor r = sigmoid(gate(reset, h_prev));
  const Tensor h_tilde = tanh(gate(candidate, mul(r, h_prev)));
  // (1 − z) ⊙ h + z ⊙ h̃
  const Tensor one_minus_z = sub(Tensor::scalar(1.0), z);
  return add(mul(one_minus_z, h_prev), mul(z, h_tilde));
}

void GruCell::collect(const std::string& prefix, ParamList& out) const {
  const std::pair<const char*, const Gate*> gates[] = {
      {"update", &update}, {"reset", &reset}, {"candidate", &candidate}};
  for (const auto& [name, g] : gates) {
    const std::string p = prefix + "." + name;
    out.push_back({p + ".input", g->input});
    out.push_back({p + ".recurrent", g->recurrent});
    out.push_back({p + ".bias", g->bias});
  }
}

AttentionHead::AttentionHead(std::size_t query_dim, std::size_t value_dim,
                             std::size_t att_dim, Rng& rng)
    : query(query_dim, att_dim, rng), key(value_dim, att_dim, rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(att_dim + 1));
  std::vector<double> w(att_dim);
  for (auto& x : w) x = rng.uniform(-a, a);
  score = Tensor::from({att_dim}, std::move(w), true);
}

Tensor AttentionHead::scores(const Tensor& q, const Tensor& regions,
                             std::size_t k) const {
  if (k == 0) throw ShapeError("attention: need at least one region");
  if (regions.rows() != q.rows() * k) {
    throw ShapeError("attention: " + shape_str(regions.shape()) +
                     " regions for batch " + std::to_string(q.rows()) +
                     " with K=" + std::to_string(k));
  }
  const Tensor hidden =
      tanh(add(key.forward(regions), repeat_rows(query.forward(q), k)));
  return reshape(matmul_nt(hidden, score), {q.rows(), k});
}

AttentionHead::Result AttentionHead::pool(const Tensor& q,
                                          const Tensor& regions,
                                          std::size_t k) const {
  const Tensor w = softmax(scores(q, regions, k), 1);
  const Tensor pooled =
      segment_sum(mul(reshape(w, {q.rows() * k, 1}), regions), k);
  return {w, pooled};
}

void AttentionHead::collect(const std::string& prefix, ParamList& out) const {
  query.collect(prefix + ".query", out);
  key.collect(prefix + ".key", out);
  out.push_back({prefix + ".score", score});
}

Tensor activate(const Tensor& x, Activation act) {
  switch (act) {
    case Activation::kNone:
      return x;
    case Activation::kTanh:
      return tanh(x);
    case Activation::kSigmoid:
      return sigmoid(x);
  }
  return x;
}

Mlp::Mlp(const std::vector<std::size_t>& dims, Activation hidden_act,
         Activation out_act, Rng& rng) {
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    layers.emplace_back(LinearLayer(dims[i], dims[i + 1], rng),
                        last ? out_act : hidden_act);
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  Tensor h = x;
  for (const auto& [layer, act] : layers) h = activate(layer.forward(h), act);
  return h;
}

std::size_t Mlp::out_dim(std::size_t in_dim) const {
  return layers.empty() ? in_dim : layers.back().first.out_dim();
}

void Mlp::collect(const std::string& prefix, ParamList& out) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].first.collect(prefix + "." + std::to_string(i), out);
  }
}

}  // namespace madapt
