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

#include "madapt/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "madapt/ops.hpp"

namespace madapt {

ModelConfig ModelConfig::paper_scale() {
  ModelConfig c;
  c.embed_dim = 300;
  c.question_dim = 1024;
  c.feature_dim = 2048;
  c.regions = 100;
  c.grid_cells = 49;
  c.attention_dim = 1024;
  c.grid_dim = 2048;
  c.fusion_dim = 4096;
  c.classifier_hidden = 4096;
  c.discriminator_hidden = 1024;
  c.source_answers = 3000;
  c.target_answers = 3000;
  return c;
}

void ModelConfig::validate() const {
  const std::size_t dims[] = {token_vocab,       embed_dim,
                              question_dim,      feature_dim,
                              regions,           grid_cells,
                              attention_dim,     grid_dim,
                              fusion_dim,        classifier_hidden,
                              discriminator_hidden, source_answers,
                              target_answers};
  for (auto d : dims) {
    if (d == 0) throw std::invalid_argument("ModelConfig: all dims must be positive");
  }
  if (token_vocab < 2) {
    throw std::invalid_argument("ModelConfig: token vocabulary needs padding plus one token");
  }
}

DualDomainModel::DualDomainModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed, 0x30DE1);
  const auto& c = config_;
  embedding = EmbeddingTable(c.token_vocab, c.embed_dim, rng);
  gru = GruCell(c.embed_dim, c.question_dim, rng);
  attention = AttentionHead(c.question_dim, c.feature_dim, c.attention_dim, rng);
  grid_projection = LinearLayer(c.feature_dim + c.question_dim, c.grid_dim, rng);
  fuse_question = LinearLayer(c.question_dim, c.fusion_dim, rng);
  fuse_visual = LinearLayer(c.feature_dim + c.grid_dim, c.fusion_dim, rng);
  source_head = Mlp({c.fusion_dim, c.classifier_hidden, c.source_answers},
                    Activation::kTanh, Activation::kNone, rng);
  target_head = Mlp({c.fusion_dim, c.classifier_hidden, c.target_answers},
                    Activation::kTanh, Activation::kNone, rng);
  discriminator = Mlp({c.fusion_dim, c.discriminator_hidden, 1},
                      Activation::kTanh, Activation::kSigmoid, rng);
}

Tensor DualDomainModel::encode_question(std::span<const std::uint32_t> tokens,
                                        std::size_t batch,
                                        std::size_t max_len) const {
  if (batch == 0 || max_len == 0 || tokens.size() != batch * max_len) {
    throw ShapeError("encode_question: " + std::to_string(tokens.size()) +
                     " tokens for batch " + std::to_string(batch) +
                     " × length " + std::to_string(max_len));
  }
  if (max_len > kMaxQuestionLength) {
    throw std::invalid_argument("encode_question: question longer than " +
                                std::to_string(kMaxQuestionLength));
  }
  std::vector<std::size_t> length(batch, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < max_len; ++t) {
      const auto tok = tokens[b * max_len + t];
      if (tok >= config_.token_vocab) {
        throw std::out_of_range("encode_question: token " +
                                std::to_string(tok) + " outside vocabulary");
      }
      if (tok != EmbeddingTable::kPadding) length[b] = t + 1;
    }
    if (length[b] == 0) {
      throw std::invalid_argument("encode_question: empty question at row " +
                                  std::to_string(b));
    }
  }
  const std::size_t steps = *std::max_element(length.begin(), length.end());
  Tensor h = Tensor::zeros({batch, config_.question_dim});
  std::vector<std::uint32_t> column(batch);
  std::vector<std::uint8_t> active(batch);
  for (std::size_t t = 0; t < steps; ++t) {
    bool all_active = true;
    for (std::size_t b = 0; b < batch; ++b) {
      column[b] = tokens[b * max_len + t];
      active[b] = t < length[b];
      all_active = all_active && active[b];
    }
    const Tensor next = gru.step(embedding.lookup(column), h);
    // Finished rows keep their state, so h ends at each last real token.
    h = all_active ? next : where_rows(active, next, h);
  }
  return h;
}

Tensor DualDomainModel::encode_visual(const Tensor& q, const Tensor& regions,
                                      const Tensor& grid,
                                      Tensor* attention_out) const {
  const auto& c = config_;
  if (q.cols() != c.question_dim || regions.cols() != c.feature_dim ||
      grid.cols() != c.feature_dim || grid.rows() != q.rows() * c.grid_cells) {
    throw ShapeError("encode_visual: q " + shape_str(q.shape()) + ", regions " +
                     shape_str(regions.shape()) + ", grid " +
                     shape_str(grid.shape()) + " do not match the model");
  }
  const auto pooled = attention.pool(q, regions, c.regions);
  if (attention_out) *attention_out = pooled.weights;
  const Tensor grid_mean = segment_mean(grid, c.grid_cells);
  const Tensor grid_part =
      tanh(grid_projection.forward(concat({grid_mean, q}, 1)));
  return concat({pooled.pooled, grid_part}, 1);
}

Tensor DualDomainModel::fuse(const Tensor& q, const Tensor& v) const {
  return mul(fuse_question.forward(q), fuse_visual.forward(v));
}

Tensor DualDomainModel::classify(const Tensor& e, Domain domain) const {
  if (e.cols() != config_.fusion_dim) {
    throw ShapeError("classify: embedding " + shape_str(e.shape()) +
                     " does not match d_e " +
                     std::to_string(config_.fusion_dim));
  }
  switch (domain) {
    case Domain::kSource:
      return source_head.forward(e);
    case Domain::kTarget:
      return target_head.forward(e);
  }
  throw std::invalid_argument("classify: unknown domain tag");
}

Tensor DualDomainModel::discriminate(const Tensor& e, double coefficient) const {
  return discriminator.forward(grl(e, coefficient));
}

Encoded DualDomainModel::encode(const MultiModalBatch& batch) const {
  const auto& c = config_;
  if (batch.regions_per_image != c.regions || batch.grid_cells != c.grid_cells ||
      batch.feature_dim != c.feature_dim) {
    throw ShapeError("batch geometry (K=" +
                     std::to_string(batch.regions_per_image) +
                     ", G=" + std::to_string(batch.grid_cells) +
                     ", d_v=" + std::to_string(batch.feature_dim) +
                     ") does not match the model");
  }
  Encoded out;
  out.q = encode_question(batch.tokens, batch.size, batch.max_length);
  const Tensor regions =
      Tensor::from({batch.size * c.regions, c.feature_dim}, batch.regions);
  const Tensor grid =
      Tensor::from({batch.size * c.grid_cells, c.feature_dim}, batch.grid);
  out.v = encode_visual(out.q, regions, grid, &out.attention);
  out.e = fuse(out.q, out.v);
  return out;
}

ParamList DualDomainModel::parameters() const {
  ParamList out;
  embedding.collect("question.embedding", out);
  gru.collect("question.gru", out);
  attention.collect("visual.attention", out);
  grid_projection.collect("visual.grid", out);
  fuse_question.collect("fusion.question", out);
  fuse_visual.collect("fusion.visual", out);
  source_head.collect("classifier.source", out);
  target_head.collect("classifier.target", out);
  discriminator.collect("discriminator", out);
  return out;
}

std::size_t DualDomainModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor.numel();
  return n;
}

void DualDomainModel::init_target_head(
    const std::vector<std::string>& source_answers,
    const std::vector<std::string>& target_answers, std::uint64_t seed) {
  if (source_answers.size() != config_.source_answers) {
    throw std::invalid_argument("init_target_head: source vocabulary size " +
                                std::to_string(source_answers.size()) +
                                " does not match the source head");
  }
  Rng rng(seed, 0x7A6E7);
  config_.target_answers = target_answers.size();
  Mlp head({config_.fusion_dim, config_.classifier_hidden,
            config_.target_answers},
           Activation::kTanh, Activation::kNone, rng);
  // Hidden layer carries over whole; output rows carry over per answer.
  head.layers.front().first = LinearLayer(
      source_head.layers.front().first.weight.clone(),
      source_head.layers.front().first.bias.clone());
  std::unordered_map<std::string, std::size_t> source_row;
  for (std::size_t i = 0; i < source_answers.size(); ++i) {
    source_row.emplace(source_answers[i], i);
  }
  const auto& src_out = source_head.layers.back().first;
  auto& dst_out = head.layers.back().first;
  const std::size_t width = dst_out.in_dim();
  auto dst_w = dst_out.weight.mutable_values();
  auto dst_b = dst_out.bias.mutable_values();
  const auto src_w = src_out.weight.values();
  const auto src_b = src_out.bias.values();
  for (std::size_t j = 0; j < target_answers.size(); ++j) {
    const auto it = source_row.find(target_answers[j]);
    if (it == source_row.end()) continue;
    std::copy_n(src_w.begin() + it->second * width, width,
                dst_w.begin() + j * width);
    dst_b[j] = src_b[it->second];
  }
  target_head = std::move(head);
}

namespace {

void clone_linear(LinearLayer& l) {
  l.weight = l.weight.clone();
  l.bias = l.bias.clone();
}

void clone_mlp(Mlp& m) {
  for (auto& [layer, act] : m.layers) clone_linear(layer);
}

}  // namespace

DualDomainModel DualDomainModel::deep_copy() const {
  DualDomainModel m = *this;
  m.embedding.rows = m.embedding.rows.clone();
  for (GruCell::Gate* g : {&m.gru.update, &m.gru.reset, &m.gru.candidate}) {
    g->input = g->input.clone();
    g->recurrent = g->recurrent.clone();
    g->bias = g->bias.clone();
  }
  clone_linear(m.attention.query);
  clone_linear(m.attention.key);
  m.attention.score = m.attention.score.clone();
  clone_linear(m.grid_projection);
  clone_linear(m.fuse_question);
  clone_linear(m.fuse_visual);
  clone_mlp(m.source_head);
  clone_mlp(m.target_head);
  clone_mlp(m.discriminator);
  return m;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<std::uint32_t> predict_answer(const Tensor& logits) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  std::vector<std::uint32_t> out(rows);
  const auto v = logits.values();
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = static_cast<std::uint32_t>(argmax(v.subspan(r * cols, cols)));
  }
  return out;
}

}  // namespace madapt
