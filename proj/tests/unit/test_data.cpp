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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "madapt/data.hpp"
#include "madapt/feature_file.hpp"
#include "madapt/losses.hpp"
#include "madapt/metrics.hpp"

using namespace madapt;

namespace {

Sample make_sample(Category cat, std::vector<std::string> answers,
                   std::size_t k = 1, std::size_t g = 1, std::size_t d = 2) {
  Sample s;
  s.regions.assign(k * d, 0.25);
  s.grid.assign(g * d, -0.5);
  s.tokens = {1, 2};
  for (std::size_t i = 0; i < kAnnotators; ++i)
    s.answers[i] = answers[i % answers.size()];
  s.category = cat;
  return s;
}

Dataset make_dataset(std::size_t n) {
  Dataset d;
  d.regions_per_image = 1;
  d.grid_cells = 1;
  d.feature_dim = 2;
  d.token_vocab_size = 5;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s = make_sample(static_cast<Category>(i % 3 == 0 ? 0 : i % 7 == 0 ? 3
                                                                          : i % 2 + 1),
                           {"a" + std::to_string(i % 5)});
    s.regions[0] = static_cast<double>(i);
    d.samples.push_back(std::move(s));
  }
  return d;
}

// Mean region feature and mean grid feature of each sample, side by side.
Tensor pooled_features(const Dataset& data) {
  const std::size_t d = data.feature_dim;
  std::vector<double> out;
  for (const Sample& s : data.samples) {
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < data.regions_per_image; ++k)
        acc += s.regions[k * d + c];
      out.push_back(acc / static_cast<double>(data.regions_per_image));
    }
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t g = 0; g < data.grid_cells; ++g) acc += s.grid[g * d + c];
      out.push_back(acc / static_cast<double>(data.grid_cells));
    }
  }
  return Tensor::from({data.size(), 2 * d}, std::move(out));
}

std::set<std::string> answer_set(const Dataset& d) {
  std::set<std::string> out;
  for (const Sample& s : d.samples)
    for (const auto& a : s.answers) out.insert(normalize_answer(a));
  return out;
}

}  // namespace

TEST_CASE("generation is bitwise reproducible from the seed") {
  const GeneratorConfig cfg;
  const ShiftConfig shift;
  const auto a = generate_domain_pair(cfg, shift, 60, 40, 7);
  const auto b = generate_domain_pair(cfg, shift, 60, 40, 7);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  const auto c = generate_domain_pair(cfg, shift, 60, 40, 8);
  CHECK_FALSE(a.first == c.first);
  const auto test = generate_domain_pair(cfg, shift, 60, 40, 7, Split::kTest);
  CHECK_FALSE(a.first == test.first);
}

TEST_CASE("generated samples are well formed") {
  const GeneratorConfig cfg;
  const auto [src, tgt] = generate_domain_pair(cfg, ShiftConfig{}, 300, 300, 3);
  CHECK(src.size() == 300);
  CHECK(tgt.size() == 300);
  for (const Dataset* d : {&src, &tgt}) {
    CHECK_NOTHROW(d->validate());
    CHECK(d->regions_per_image == cfg.regions_per_image);
    CHECK(d->grid_cells == cfg.grid_cells);
    CHECK(d->feature_dim == cfg.feature_dim);
    CHECK(d->token_vocab_size == cfg.token_vocab_size());
    for (const Sample& s : d->samples) {
      CHECK(s.answers.size() == kAnnotators);
      CHECK(!s.tokens.empty());
      CHECK(s.tokens.size() <= kMaxQuestionLength);
      CHECK(static_cast<std::size_t>(s.category) < kCategoryCount);
      // Features are stored at 32-bit precision.
      for (double v : s.regions) CHECK(static_cast<double>(static_cast<float>(v)) == v);
    }
  }
  for (const Sample& s : src.samples) {
    CHECK(s.domain == DomainTag::kSource);
    CHECK(s.category != Category::kUnanswerable);
  }
  for (const Sample& s : tgt.samples) CHECK(s.domain == DomainTag::kTarget);
}

TEST_CASE("unanswerable target questions carry the dedicated answer") {
  ShiftConfig shift;
  shift.unanswerable_fraction = 0.2863;
  const auto [src, tgt] = generate_domain_pair(GeneratorConfig{}, shift, 10, 3000, 5);
  std::size_t unanswerable = 0;
  for (const Sample& s : tgt.samples) {
    if (s.category != Category::kUnanswerable) continue;
    ++unanswerable;
    CHECK(majority_answer(s) == kUnanswerable);
  }
  const double frac = static_cast<double>(unanswerable) / 3000.0;
  // Binomial standard deviation at n = 3000 is about 0.008.
  CHECK(frac == doctest::Approx(0.2863).epsilon(0.15));
}

TEST_CASE("shared answer count floors the overlap fraction") {
  ShiftConfig shift;
  CHECK(shared_answer_count(shift, 30) == 8);
  CHECK(shared_answer_count(shift, 3000) == 824);
  shift.overlap = 0.25;
  CHECK(shared_answer_count(shift, 32) == 8);
  shift.overlap = 1.0;
  CHECK(shared_answer_count(shift, 30) == 30);
}

TEST_CASE("generated vocabularies overlap in the configured number of answers") {
  ShiftConfig shift;
  shift.unanswerable_fraction = 0.0;
  shift.label_skew = 0.0;
  const GeneratorConfig cfg;
  REQUIRE(cfg.answer_count() == 30);
  const auto [src, tgt] = generate_domain_pair(cfg, shift, 3000, 3000, 21);
  const auto a = answer_set(src), b = answer_set(tgt);
  std::vector<std::string> shared;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(shared));
  CHECK(shared.size() == 8);
}

TEST_CASE("invalid shift configurations are rejected") {
  const GeneratorConfig cfg;
  ShiftConfig s;
  s.overlap = 1.5;
  CHECK_THROWS_AS(generate_domain_pair(cfg, s, 5, 5, 0), std::invalid_argument);
  s = ShiftConfig{};
  s.unanswerable_fraction = -0.1;
  CHECK_THROWS_AS(generate_domain_pair(cfg, s, 5, 5, 0), std::invalid_argument);
  s = ShiftConfig{};
  s.covariance_scale = 0.0;
  CHECK_THROWS_AS(generate_domain_pair(cfg, s, 5, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_domain_pair(cfg, ShiftConfig{}, 0, 5, 0),
                  std::invalid_argument);
}

TEST_CASE("zero shift leaves the pooled feature marginals matched") {
  const auto [src, tgt] =
      generate_domain_pair(GeneratorConfig{}, ShiftConfig::none(), 500, 500, 13);
  const double gap =
      mmd_sq(pooled_features(src), pooled_features(tgt), KernelSpec::median()).item();
  CHECK(gap <= 0.02);
  const ProbeResult probe = probe_domain_gap(
      pooled_features(src), pooled_features(tgt), KernelSpec::median());
  CHECK(probe.accuracy <= 0.60);
}

TEST_CASE("large shift is detectable by a domain probe") {
  ShiftConfig shift;
  shift.visual_shift = 2.0;
  shift.covariance_scale = 2.0;
  const auto [src, tgt] = generate_domain_pair(GeneratorConfig{}, shift, 500, 500, 13);
  const ProbeResult probe = probe_domain_gap(
      pooled_features(src), pooled_features(tgt), KernelSpec::median());
  CHECK(probe.accuracy >= 0.90);
  CHECK(probe.mmd_sq > 0.02);
}

TEST_CASE("answer normalization and majority vote") {
  CHECK(normalize_answer("  Yes \t") == "yes");
  CHECK(majority_answer(make_sample(Category::kOther, {"b", "b", "a"})) == "b");
  // Five-five tie goes to the lexicographically smaller answer.
  CHECK(majority_answer(make_sample(Category::kOther, {"dog", "cat"})) == "cat");
  CHECK(majority_answer(make_sample(Category::kOther, {"Two", "two ", "3"})) == "two");
}

TEST_CASE("vocabulary ranks by frequency with lexicographic ties") {
  std::vector<Sample> samples;
  for (int i = 0; i < 5; ++i) samples.push_back(make_sample(Category::kOther, {"a"}));
  for (int i = 0; i < 3; ++i) samples.push_back(make_sample(Category::kOther, {"b"}));
  samples.push_back(make_sample(Category::kOther, {"c"}));
  const AnswerVocab top2 = build_vocab(samples, 2);
  CHECK(top2.answers() == std::vector<std::string>{"a", "b"});
  CHECK(top2.counts() == std::vector<std::size_t>{5, 3});
  CHECK(top2.label_of("b") == 1);
  CHECK(top2.label_of("c") == AnswerVocab::kOutOfVocab);
  CHECK(top2.label_of(samples.back()) == AnswerVocab::kOutOfVocab);
  CHECK(top2.label_of(samples.front()) == 0);

  const AnswerVocab all = build_vocab(samples, 50);
  CHECK(all.answers() == std::vector<std::string>{"a", "b", "c"});

  std::vector<Sample> tied{make_sample(Category::kOther, {"zebra"}),
                           make_sample(Category::kOther, {"apple"}),
                           make_sample(Category::kOther, {"mango"})};
  CHECK(build_vocab(tied, 10).answers() ==
        std::vector<std::string>{"apple", "mango", "zebra"});
}

TEST_CASE("vocabulary labels are unique positions") {
  const auto [src, tgt] = generate_domain_pair(GeneratorConfig{}, ShiftConfig{}, 400, 400, 1);
  const AnswerVocab v = build_vocab(tgt.samples, 20);
  CHECK(v.size() <= 20);
  std::set<std::string> seen(v.answers().begin(), v.answers().end());
  CHECK(seen.size() == v.size());
  for (std::uint32_t i = 0; i < v.size(); ++i) CHECK(v.label_of(v.answer(i)) == i);
  CHECK(std::is_sorted(v.counts().rbegin(), v.counts().rend()));
}

TEST_CASE("split fraction sizes and determinism") {
  const Dataset big = make_dataset(20000);
  CHECK(split_fraction(big, 1.0 / 8.0, 3).size() == 2500);
  CHECK(split_fraction(big, 1.0 / 4.0, 3).size() == 5000);
  CHECK(split_fraction(big, 1.0 / 2.0, 3).size() == 10000);
  CHECK(split_fraction(big, 1.0, 3) == big);
  CHECK(split_fraction(big, 0.25, 9) == split_fraction(big, 0.25, 9));
  CHECK_FALSE(split_fraction(big, 0.25, 9) == split_fraction(big, 0.25, 10));
  CHECK_THROWS_AS(split_fraction(big, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_fraction(big, 1.5, 1), std::invalid_argument);
}

TEST_CASE("split fraction is stratified and order preserving") {
  const Dataset data = make_dataset(997);
  std::array<std::size_t, kCategoryCount> full{};
  for (const Sample& s : data.samples) ++full[static_cast<std::size_t>(s.category)];
  for (double f : {0.125, 0.25, 0.5}) {
    const Dataset sub = split_fraction(data, f, 4);
    CHECK(sub.size() == static_cast<std::size_t>(std::llround(997 * f)));
    std::array<std::size_t, kCategoryCount> got{};
    for (const Sample& s : sub.samples) ++got[static_cast<std::size_t>(s.category)];
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      const double exact = static_cast<double>(full[c]) * f;
      CHECK(static_cast<double>(got[c]) >= std::floor(exact));
      CHECK(static_cast<double>(got[c]) <= std::ceil(exact));
    }
    // Region feature 0 holds the original index.
    for (std::size_t i = 1; i < sub.size(); ++i)
      CHECK(sub.samples[i - 1].regions[0] < sub.samples[i].regions[0]);
  }
}

TEST_CASE("batch iteration") {
  const auto b = batch_iter(10, 4, 1, 0);
  REQUIRE(b.size() == 3);
  CHECK(b[0].size() == 4);
  CHECK(b[1].size() == 4);
  CHECK(b[2].size() == 2);
  std::vector<std::size_t> all;
  for (const auto& batch : b) all.insert(all.end(), batch.begin(), batch.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
  CHECK(batch_iter(10, 4, 1, 0) == b);
  CHECK_FALSE(batch_iter(100, 100, 1, 1) == batch_iter(100, 100, 1, 0));
  CHECK(batch_iter(3, 128, 0, 0).size() == 1);
}

TEST_CASE("batch stream cycles epochs and reshuffles") {
  BatchStream stream(5, 2, 3);
  std::vector<std::size_t> sizes;
  for (int i = 0; i < 6; ++i) sizes.push_back(stream.next().size());
  CHECK(sizes == std::vector<std::size_t>{2, 2, 1, 2, 2, 1});
  CHECK(stream.epoch() == 1);
  BatchStream again(5, 2, 3);
  for (const auto& expected : batch_iter(5, 2, 3, 0)) CHECK(again.next() == expected);
  for (const auto& expected : batch_iter(5, 2, 3, 1)) CHECK(again.next() == expected);
}

TEST_CASE("make_batch pads questions and maps labels") {
  Dataset d = make_dataset(3);
  d.samples[1].tokens = {3, 4, 1};
  d.samples[2].answers.fill("zzz");
  const AnswerVocab vocab = build_vocab({d.samples[0], d.samples[1]}, 10);
  const MultiModalBatch b = make_batch(d, {2, 1}, &vocab);
  CHECK(b.size == 2);
  CHECK(b.max_length == 3);
  CHECK(b.tokens == std::vector<std::uint32_t>{1, 2, 0, 3, 4, 1});
  CHECK(b.lengths == std::vector<std::size_t>{2, 3});
  CHECK(b.labels[0] == AnswerVocab::kOutOfVocab);
  CHECK(b.labels[1] == vocab.label_of(d.samples[1]));
  CHECK(b.regions == std::vector<double>{2, 0.25, 1, 0.25});
  CHECK(b.indices == std::vector<std::size_t>{2, 1});
}

TEST_CASE("feature file roundtrip") {
  const auto [src, tgt] = generate_domain_pair(GeneratorConfig{}, ShiftConfig{}, 3, 3, 2);
  CHECK(decode_feature_file(encode_feature_file(src)) == src);
  CHECK(decode_feature_file(encode_feature_file(tgt)) == tgt);

  const auto path = std::filesystem::temp_directory_path() / "madapt_test_roundtrip.mmf";
  save_feature_file(src, path);
  CHECK(load_feature_file(path) == src);
  std::filesystem::remove(path);

  Dataset empty = src;
  empty.samples.clear();
  CHECK(decode_feature_file(encode_feature_file(empty)) == empty);
}

TEST_CASE("feature file header is bit exact") {
  const auto [src, tgt] = generate_domain_pair(GeneratorConfig{}, ShiftConfig{}, 2, 1, 2);
  const auto bytes = encode_feature_file(src);
  REQUIRE(bytes.size() >= 20);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MMDA");
  auto u16 = [&](std::size_t at) { return bytes[at] | (bytes[at + 1] << 8); };
  auto u32 = [&](std::size_t at) {
    return static_cast<std::uint32_t>(u16(at)) |
           (static_cast<std::uint32_t>(u16(at + 2)) << 16);
  };
  CHECK(u16(4) == kFeatureFileVersion);
  CHECK(u32(6) == 2);
  CHECK(u16(10) == src.regions_per_image);
  CHECK(u16(12) == src.grid_cells);
  CHECK(u16(14) == src.feature_dim);
  CHECK(u32(16) == src.token_vocab_size);
  float first;
  std::memcpy(&first, bytes.data() + 20, 4);
  CHECK(static_cast<double>(first) == src.samples[0].regions[0]);
}

TEST_CASE("feature file rejections report byte offsets") {
  const auto [src, tgt] = generate_domain_pair(GeneratorConfig{}, ShiftConfig{}, 3, 1, 2);
  const auto bytes = encode_feature_file(src);

  try {
    decode_feature_file({});
    FAIL("empty input accepted");
  } catch (const FeatureFileError& e) {
    CHECK(e.offset() == 0);
    CHECK(std::string(e.what()).find("magic") != std::string::npos);
  }

  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_feature_file(bad_version), FeatureFileError);

  // Cut inside the third float of the first record.
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + 20 + 4 * 2 + 1);
  try {
    decode_feature_file(cut);
    FAIL("truncated input accepted");
  } catch (const FeatureFileError& e) {
    CHECK(e.offset() == 28);
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }

  auto more = bytes;
  more[6] = 4;
  try {
    decode_feature_file(more);
    FAIL("overstated count accepted");
  } catch (const FeatureFileError& e) {
    CHECK(e.offset() == bytes.size());
    CHECK(std::string(e.what()).find("record count 4") != std::string::npos);
  }
  auto fewer = bytes;
  fewer[6] = 2;
  try {
    decode_feature_file(fewer);
    FAIL("understated count accepted");
  } catch (const FeatureFileError& e) {
    CHECK(std::string(e.what()).find("record count 2") != std::string::npos);
  }

  auto nan = bytes;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 24, &q, 4);
  try {
    decode_feature_file(nan);
    FAIL("non-finite feature accepted");
  } catch (const FeatureFileError& e) {
    CHECK(e.offset() == 24);
  }

  CHECK_THROWS_AS(load_feature_file("/nonexistent/madapt.mmf"), std::exception);
}
