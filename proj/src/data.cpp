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

#include "madapt/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace madapt {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::kYesNo:
      return "yes/no";
    case Category::kNumber:
      return "number";
    case Category::kOther:
      return "other";
    case Category::kUnanswerable:
      return "unanswerable";
  }
  return "?";
}

void Dataset::validate() const {
  const std::size_t nr = regions_per_image * feature_dim;
  const std::size_t ng = grid_cells * feature_dim;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    auto fail = [i](const std::string& why) {
      throw std::invalid_argument("sample " + std::to_string(i) + ": " + why);
    };
    if (s.regions.size() != nr) fail("region feature count mismatch");
    if (s.grid.size() != ng) fail("grid feature count mismatch");
    if (s.tokens.empty()) fail("empty question");
    if (s.tokens.size() > kMaxQuestionLength) fail("question too long");
    for (auto t : s.tokens) {
      if (t == 0 || t >= token_vocab_size) fail("token index out of range");
    }
    for (double v : s.regions)
      if (!std::isfinite(v)) fail("non-finite region feature");
    for (double v : s.grid)
      if (!std::isfinite(v)) fail("non-finite grid feature");
  }
}

std::string normalize_answer(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string majority_answer(const Sample& s) {
  std::map<std::string, int> counts;
  for (const auto& a : s.answers) ++counts[normalize_answer(a)];
  std::string best;
  int best_count = -1;
  // std::map iterates lexicographically, so the first maximum wins ties.
  for (const auto& [answer, n] : counts) {
    if (n > best_count) {
      best = answer;
      best_count = n;
    }
  }
  return best;
}

AnswerVocab::AnswerVocab(std::vector<std::string> answers,
                         std::vector<std::size_t> counts)
    : answers_(std::move(answers)), counts_(std::move(counts)) {
  if (counts_.size() != answers_.size()) counts_.resize(answers_.size(), 0);
  for (std::size_t i = 0; i < answers_.size(); ++i) {
    if (!index_.emplace(answers_[i], static_cast<std::uint32_t>(i)).second) {
      throw std::invalid_argument("duplicate answer in vocabulary: " +
                                  answers_[i]);
    }
  }
}

std::uint32_t AnswerVocab::label_of(std::string_view answer) const {
  const auto it = index_.find(normalize_answer(answer));
  return it == index_.end() ? kOutOfVocab : it->second;
}

std::uint32_t AnswerVocab::label_of(const Sample& s) const {
  return label_of(majority_answer(s));
}

AnswerVocab build_vocab(const std::vector<Sample>& samples, std::size_t cap) {
  std::map<std::string, std::size_t> freq;
  for (const auto& s : samples) ++freq[majority_answer(s)];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(),
                                                          freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > cap) ranked.resize(cap);
  std::vector<std::string> answers;
  std::vector<std::size_t> counts;
  for (auto& [a, n] : ranked) {
    answers.push_back(a);
    counts.push_back(n);
  }
  return AnswerVocab(std::move(answers), std::move(counts));
}

std::size_t GeneratorConfig::token_vocab_size() const {
  const std::size_t content = question_types * type_words + concepts * hint_words;
  return 1 + 2 * content + filler_words + filler_words / 2;
}

ShiftConfig ShiftConfig::none() {
  ShiftConfig s;
  s.visual_shift = 0.0;
  s.text_shift = 0.0;
  s.covariance_scale = 1.0;
  s.nuisance_scale = 0.0;
  s.label_skew = 0.0;
  s.overlap = 1.0;
  s.unanswerable_fraction = 0.0;
  return s;
}

void ShiftConfig::validate(std::size_t answers) const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(overlap)) {
    throw std::invalid_argument("overlap fraction must lie in [0, 1]");
  }
  if (shared_answer_count(*this, answers) > answers) {
    throw std::invalid_argument("overlap exceeds the answer vocabulary");
  }
  if (!in_unit(unanswerable_fraction)) {
    throw std::invalid_argument("unanswerable fraction must lie in [0, 1]");
  }
  if (!in_unit(text_shift)) {
    throw std::invalid_argument("text shift must lie in [0, 1]");
  }
  if (!(covariance_scale > 0.0)) {
    throw std::invalid_argument("covariance scale must be positive");
  }
  if (!(nuisance_scale >= 0.0) || !std::isfinite(nuisance_scale)) {
    throw std::invalid_argument("nuisance scale must be finite and >= 0");
  }
  if (!(label_skew >= 0.0) || !std::isfinite(visual_shift)) {
    throw std::invalid_argument("label skew must be >= 0, shift finite");
  }
}

std::size_t shared_answer_count(const ShiftConfig& shift, std::size_t answers) {
  // Small epsilon so that e.g. 0.25 · 32 is not floored to 7 by rounding.
  return static_cast<std::size_t>(
      std::floor(shift.overlap * static_cast<double>(answers) + 1e-9));
}

namespace {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

// Parameters drawn once per seed and shared by both domains.
struct World {
  std::vector<std::vector<double>> prototypes;  // concept -> d_v
  std::vector<std::vector<double>> keys;        // question type -> d_v
  std::vector<double> shift_direction;
  std::vector<std::vector<double>> nuisance;  // rank × d_v
  std::vector<bool> shared;                 // per answer cell
  std::vector<double> target_prior;         // per answer cell
};

World make_world(const GeneratorConfig& cfg, const ShiftConfig& shift,
                 std::uint64_t seed) {
  Rng rng(seed, 0);
  World w;
  const auto d = cfg.feature_dim;
  auto draw = [&](double scale) {
    std::vector<double> v(d);
    for (auto& x : v) x = rng.normal(0.0, scale);
    return v;
  };
  for (std::size_t c = 0; c < cfg.concepts; ++c)
    w.prototypes.push_back(draw(cfg.prototype_scale));
  for (std::size_t q = 0; q < cfg.question_types; ++q)
    w.keys.push_back(draw(cfg.key_scale));
  w.shift_direction = draw(1.0);
  for (std::size_t k = 0; k < shift.nuisance_rank; ++k)
    w.nuisance.push_back(draw(1.0));

  const std::size_t n = cfg.answer_count();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  w.shared.assign(n, false);
  const std::size_t n_shared = shared_answer_count(shift, n);
  for (std::size_t i = 0; i < n_shared; ++i) w.shared[perm[i]] = true;

  rng.shuffle(perm);
  w.target_prior.assign(n, 0.0);
  for (std::size_t rank = 0; rank < n; ++rank) {
    w.target_prior[perm[rank]] =
        1.0 / std::pow(static_cast<double>(rank + 1), shift.label_skew);
  }
  return w;
}

std::string answer_string(std::size_t cell, DomainTag domain, const World& w) {
  const bool source_name = domain == DomainTag::kSource || w.shared[cell];
  return (source_name ? "ans" : "tans") + std::to_string(cell);
}

Category category_of(std::size_t question_type) {
  if (question_type == 0) return Category::kYesNo;
  if (question_type == 1) return Category::kNumber;
  return Category::kOther;
}

struct TokenLayout {
  std::size_t type_base, hint_base, filler_base;
  std::size_t syn_type_base, syn_hint_base, syn_filler_base, syn_fillers;
};

TokenLayout token_layout(const GeneratorConfig& cfg) {
  TokenLayout t{};
  t.type_base = 1;
  t.hint_base = t.type_base + cfg.question_types * cfg.type_words;
  t.filler_base = t.hint_base + cfg.concepts * cfg.hint_words;
  t.syn_type_base = t.filler_base + cfg.filler_words;
  t.syn_hint_base = t.syn_type_base + cfg.question_types * cfg.type_words;
  t.syn_filler_base = t.syn_hint_base + cfg.concepts * cfg.hint_words;
  t.syn_fillers = cfg.filler_words / 2;
  return t;
}

Dataset generate_domain(const GeneratorConfig& cfg, const ShiftConfig& shift,
                        const World& world, DomainTag domain, std::size_t n,
                        Rng& rng) {
  const bool target = domain == DomainTag::kTarget;
  const std::size_t d = cfg.feature_dim;
  const std::size_t cells = cfg.answer_count();
  const TokenLayout tok = token_layout(cfg);

  Dataset data;
  data.regions_per_image = cfg.regions_per_image;
  data.grid_cells = cfg.grid_cells;
  data.feature_dim = d;
  data.token_vocab_size = cfg.token_vocab_size();
  data.samples.reserve(n);

  const double scale = target ? shift.covariance_scale : 1.0;
  const double offset = target ? shift.visual_shift : 0.0;
  const double text_shift = target ? shift.text_shift : 0.0;
  const std::vector<double> prior =
      target ? world.target_prior : std::vector<double>(cells, 1.0);
  std::vector<std::string> domain_answers;
  for (std::size_t c = 0; c < cells; ++c)
    domain_answers.push_back(answer_string(c, domain, world));
  if (target && shift.unanswerable_fraction > 0.0)
    domain_answers.emplace_back(kUnanswerable);

  // Applies the domain transform and rounds to on-disk precision. Nuisance
  // noise only touches grid cells, which reach the model through a learned
  // projection.
  const double nuisance = target ? shift.nuisance_scale : 0.0;
  std::vector<double> extra(d);
  auto emit = [&](const std::vector<double>& base, double noise,
                  std::vector<double>& out, bool grid) {
    std::fill(extra.begin(), extra.end(), 0.0);
    if (grid && nuisance > 0.0) {
      for (const auto& u : world.nuisance) {
        const double z = nuisance * rng.normal();
        for (std::size_t k = 0; k < d; ++k) extra[k] += z * u[k];
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double x = base[k] + noise * rng.normal();
      out.push_back(
          to_f32(scale * x + offset * world.shift_direction[k] + extra[k]));
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.domain = domain;
    const bool unanswerable =
        target && rng.uniform() < shift.unanswerable_fraction;
    const std::size_t cell = rng.categorical(prior);
    const std::size_t qtype = cell / cfg.concepts;
    const std::size_t concept_id = cell % cfg.concepts;
    const double noise = cfg.feature_noise;

    const std::size_t relevant = rng.below(cfg.regions_per_image);
    std::vector<double> base(d);
    for (std::size_t r = 0; r < cfg.regions_per_image; ++r) {
      std::size_t c = concept_id, q = qtype;
      if (r != relevant || unanswerable) {
        c = rng.below(cfg.concepts);
        q = rng.below(cfg.question_types - 1);
        if (q >= qtype) ++q;
      }
      for (std::size_t k = 0; k < d; ++k)
        base[k] = world.prototypes[c][k] + world.keys[q][k];
      emit(base, noise, s.regions, false);
    }
    for (std::size_t g = 0; g < cfg.grid_cells; ++g) {
      for (std::size_t k = 0; k < d; ++k)
        base[k] = unanswerable ? 0.0
                               : cfg.grid_signal * world.prototypes[concept_id][k];
      emit(base, noise, s.grid, true);
    }

    const std::size_t len =
        cfg.min_question_length +
        rng.below(cfg.max_question_length - cfg.min_question_length + 1);
    auto pick_word = [&](std::size_t src, std::size_t syn) {
      return static_cast<std::uint32_t>(rng.uniform() < text_shift ? syn : src);
    };
    const std::size_t tw = rng.below(cfg.type_words);
    s.tokens.push_back(
        pick_word(tok.type_base + qtype * cfg.type_words + tw,
                  tok.syn_type_base + qtype * cfg.type_words + tw));
    if (rng.uniform() < cfg.hint_probability) {
      const std::size_t hw = rng.below(cfg.hint_words);
      s.tokens.push_back(
          pick_word(tok.hint_base + concept_id * cfg.hint_words + hw,
                    tok.syn_hint_base + concept_id * cfg.hint_words + hw));
    }
    while (s.tokens.size() < len) {
      const std::size_t f = rng.below(cfg.filler_words);
      s.tokens.push_back(pick_word(tok.filler_base + f,
                                   tok.syn_filler_base + f % tok.syn_fillers));
    }
    rng.shuffle(s.tokens);

    const std::string truth = unanswerable ? std::string(kUnanswerable)
                                           : answer_string(cell, domain, world);
    for (auto& a : s.answers) {
      a = rng.uniform() < cfg.annotator_agreement
              ? truth
              : domain_answers[rng.below(domain_answers.size())];
    }
    s.category = unanswerable ? Category::kUnanswerable : category_of(qtype);
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace

std::pair<Dataset, Dataset> generate_domain_pair(const GeneratorConfig& config,
                                                 const ShiftConfig& shift,
                                                 std::size_t n_source,
                                                 std::size_t n_target,
                                                 std::uint64_t seed,
                                                 Split split) {
  if (n_source == 0 || n_target == 0) {
    throw std::invalid_argument("domain sizes must be at least 1");
  }
  if (config.question_types < 2 || config.concepts < 1 ||
      config.regions_per_image < 1 || config.grid_cells < 1 ||
      config.feature_dim < 1 || config.type_words < 1 ||
      config.hint_words < 1 || config.filler_words < 2 ||
      config.min_question_length < 2 ||
      config.max_question_length < config.min_question_length ||
      config.max_question_length > kMaxQuestionLength) {
    throw std::invalid_argument("invalid generator configuration");
  }
  shift.validate(config.answer_count());
  const World world = make_world(config, shift, seed);
  const auto base = 1 + 2 * static_cast<std::uint64_t>(split);
  Rng source_rng(seed, base);
  Rng target_rng(seed, base + 1);
  return {generate_domain(config, shift, world, DomainTag::kSource, n_source,
                          source_rng),
          generate_domain(config, shift, world, DomainTag::kTarget, n_target,
                          target_rng)};
}

Dataset split_fraction(const Dataset& data, double fraction,
                       std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("fraction must lie in (0, 1]");
  }
  std::array<std::vector<std::size_t>, kCategoryCount> by_cat;
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_cat[static_cast<std::size_t>(data.samples[i].category)].push_back(i);
  }
  const auto total = static_cast<std::size_t>(
      std::llround(static_cast<double>(data.size()) * fraction));
  std::array<std::size_t, kCategoryCount> take{};
  std::array<double, kCategoryCount> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const double exact = static_cast<double>(by_cat[c].size()) * fraction;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(take[c]);
    assigned += take[c];
  }
  std::array<std::size_t, kCategoryCount> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < total && k < kCategoryCount; ++k) {
    if (take[order[k]] < by_cat[order[k]].size()) {
      ++take[order[k]];
      ++assigned;
    }
  }

  Rng rng(seed, 0x5157);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    auto idx = by_cat[c];
    rng.shuffle(idx);
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + take[c]);
  }
  std::sort(chosen.begin(), chosen.end());
  Dataset out = data;
  out.samples.clear();
  for (auto i : chosen) out.samples.push_back(data.samples[i]);
  return out;
}

std::vector<std::vector<std::size_t>> batch_iter(std::size_t n,
                                                 std::size_t batch_size,
                                                 std::uint64_t seed,
                                                 std::uint64_t epoch) {
  if (n == 0 || batch_size == 0) {
    throw std::invalid_argument("batch_iter: empty dataset or zero batch size");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, 0xBA7C0000ULL + epoch);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b < n; b += batch_size) {
    batches.emplace_back(order.begin() + b,
                         order.begin() + std::min(n, b + batch_size));
  }
  return batches;
}

BatchStream::BatchStream(std::size_t n, std::size_t batch_size,
                         std::uint64_t seed)
    : n_(n), batch_size_(batch_size), seed_(seed) {
  batches_ = batch_iter(n_, batch_size_, seed_, epoch_);
}

const std::vector<std::size_t>& BatchStream::next() {
  if (cursor_ == batches_.size()) {
    ++epoch_;
    batches_ = batch_iter(n_, batch_size_, seed_, epoch_);
    cursor_ = 0;
  }
  return batches_[cursor_++];
}

MultiModalBatch make_batch(const Dataset& data,
                           const std::vector<std::size_t>& indices,
                           const AnswerVocab* vocab) {
  if (indices.empty()) throw std::invalid_argument("make_batch: no samples");
  MultiModalBatch b;
  b.size = indices.size();
  b.regions_per_image = data.regions_per_image;
  b.grid_cells = data.grid_cells;
  b.feature_dim = data.feature_dim;
  b.indices = indices;
  for (auto i : indices) {
    b.max_length = std::max(b.max_length, data.samples.at(i).tokens.size());
  }
  b.regions.reserve(b.size * data.regions_per_image * data.feature_dim);
  b.grid.reserve(b.size * data.grid_cells * data.feature_dim);
  b.tokens.assign(b.size * b.max_length, 0);
  for (std::size_t k = 0; k < b.size; ++k) {
    const Sample& s = data.samples[indices[k]];
    b.regions.insert(b.regions.end(), s.regions.begin(), s.regions.end());
    b.grid.insert(b.grid.end(), s.grid.begin(), s.grid.end());
    std::copy(s.tokens.begin(), s.tokens.end(),
              b.tokens.begin() + k * b.max_length);
    b.lengths.push_back(s.tokens.size());
    b.labels.push_back(vocab ? vocab->label_of(s) : AnswerVocab::kOutOfVocab);
  }
  return b;
}

}  // namespace madapt
