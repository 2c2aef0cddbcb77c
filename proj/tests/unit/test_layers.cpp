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

#include <cmath>
#include <random>

#include "doctest.h"
#include "madapt/gradcheck.hpp"
#include "madapt/layers.hpp"
#include "madapt/ops.hpp"
#include "madapt/train.hpp"
#include "util.hpp"

using namespace madapt;
using madapt::testing::normals;
using madapt::testing::random_tensor;

namespace {

void fill(Tensor t, const std::vector<double>& v) {
  auto dst = t.mutable_values();
  REQUIRE(dst.size() == v.size());
  std::copy(v.begin(), v.end(), dst.begin());
}

void fill_all(const ParamList& params, double value) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    for (auto& x : t.mutable_values()) x = value;
  }
}

ParamList params_of(const auto& layer) {
  ParamList out;
  layer.collect("p", out);
  return out;
}

std::vector<Tensor> tensors(const ParamList& params) {
  std::vector<Tensor> out;
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Row-major [rows × cols] times a vector.
std::vector<double> matvec(std::span<const double> m, std::size_t rows,
                           std::size_t cols, const std::vector<double>& x) {
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) y[r] += m[r * cols + c] * x[c];
  return y;
}

}  // namespace

TEST_CASE("linear layer hand cases") {
  LinearLayer id(Tensor::mat({{1, 0}, {0, 1}}, true), Tensor::vec({0, 0}, true));
  const Tensor y = id.forward(Tensor::mat({{5, 7}}));
  CHECK(y.at(0) == 5.0);
  CHECK(y.at(1) == 7.0);

  LinearLayer zero(Tensor::zeros({2, 3}, true), Tensor::vec({1, 2}, true));
  const Tensor z = zero.forward(Tensor::mat({{9, -4, 3}}));
  CHECK(z.at(0) == 1.0);
  CHECK(z.at(1) == 2.0);

  LinearLayer sum2(Tensor::mat({{1, 1}}, true), Tensor::vec({0.5}, true));
  CHECK(sum2.forward(Tensor::mat({{2, 3}})).item() == 5.5);

  CHECK_THROWS_AS(sum2.forward(Tensor::mat({{1, 2, 3}})), ShapeError);
}

TEST_CASE("gru with zero parameters") {
  Rng rng(1);
  GruCell cell(3, 2, rng);
  fill_all(params_of(cell), 0.0);
  const Tensor x = Tensor::mat({{0.3, -1.0, 2.0}});
  const Tensor h = cell.step(x, Tensor::mat({{1, 1}}));
  CHECK(h.at(0) == 0.5);
  CHECK(h.at(1) == 0.5);
  const Tensor h0 = cell.step(x, Tensor::zeros({1, 2}));
  CHECK(h0.at(0) == 0.0);
  CHECK(h0.at(1) == 0.0);
  CHECK_THROWS_AS(cell.step(Tensor::zeros({1, 2}), Tensor::zeros({1, 2})), ShapeError);
}

TEST_CASE("gru step matches a hand-coded recurrence") {
  Rng rng(7);
  const std::size_t in = 3, hid = 4;
  GruCell cell(in, hid, rng);
  std::mt19937_64 gen(8);
  for (auto* g : {&cell.update, &cell.reset, &cell.candidate}) {
    fill(g->bias, normals(gen, hid, 0.3));
  }
  std::vector<double> h = normals(gen, hid, 0.5);
  for (int t = 0; t < 3; ++t) {
    const std::vector<double> x = normals(gen, in);
    auto pre = [&](const GruCell::Gate& g, const std::vector<double>& hv) {
      auto a = matvec(g.input.values(), hid, in, x);
      auto b = matvec(g.recurrent.values(), hid, hid, hv);
      for (std::size_t i = 0; i < hid; ++i) a[i] += b[i] + g.bias.at(i);
      return a;
    };
    const auto zp = pre(cell.update, h);
    const auto rp = pre(cell.reset, h);
    std::vector<double> rh(hid);
    for (std::size_t i = 0; i < hid; ++i) rh[i] = sigm(rp[i]) * h[i];
    const auto cp = pre(cell.candidate, rh);
    std::vector<double> expect(hid);
    for (std::size_t i = 0; i < hid; ++i) {
      const double z = sigm(zp[i]);
      expect[i] = (1.0 - z) * h[i] + z * std::tanh(cp[i]);
    }
    const Tensor got = cell.step(Tensor::from({1, in}, x), Tensor::from({1, hid}, h));
    for (std::size_t i = 0; i < hid; ++i) {
      CHECK(got.at(i) == doctest::Approx(expect[i]).epsilon(1e-13));
    }
    h = expect;
  }
}

TEST_CASE("gru output stays inside (-1, 1)") {
  Rng rng(3);
  GruCell cell(5, 6, rng);
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-0.999, 0.999);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> h(6);
    for (auto& v : h) v = u(gen);
    const Tensor out = cell.step(random_tensor(gen, {1, 5}, false, 3.0),
                                 Tensor::from({1, 6}, h));
    for (double v : out.values()) {
      CHECK(v > -1.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("attention over a single region returns it") {
  Rng rng(2);
  AttentionHead head(3, 4, 5, rng);
  const Tensor q = Tensor::mat({{0.1, 0.2, 0.3}});
  const Tensor r = Tensor::mat({{1, -2, 3, 0.5}});
  const auto res = head.pool(q, r, 1);
  CHECK(res.weights.item() == 1.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(res.pooled.at(i) == r.at(i));
  CHECK_THROWS_AS(head.pool(q, r, 0), ShapeError);
}

TEST_CASE("identical regions get uniform weights") {
  Rng rng(2);
  AttentionHead head(3, 2, 4, rng);
  const Tensor q = Tensor::mat({{0.5, -0.5, 1.0}});
  const Tensor r = Tensor::mat({{0.25, -1.5}, {0.25, -1.5}, {0.25, -1.5}});
  const auto res = head.pool(q, r, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(res.weights.at(i) == doctest::Approx(1.0 / 3.0));
  CHECK(res.pooled.at(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(res.pooled.at(1) == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("scores ln 2 and 0 give weights 2/3 and 1/3") {
  Rng rng(2);
  AttentionHead head(1, 1, 1, rng);
  fill_all(params_of(head), 0.0);
  fill(head.key.weight, {1.0});
  const double a = 0.5;
  fill(head.score, {std::log(2.0) / a});
  const Tensor r = Tensor::mat({{std::atanh(a)}, {0.0}});
  const auto res = head.pool(Tensor::mat({{0.0}}), r, 2);
  CHECK(res.weights.at(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(res.weights.at(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("attention weights are distributions, shift invariant") {
  Rng rng(9);
  AttentionHead head(4, 3, 5, rng);
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor q = random_tensor(gen, {2, 4}, false);
    const Tensor r = random_tensor(gen, {2 * 6, 3}, false, 2.0);
    const auto res = head.pool(q, r, 6);
    const Tensor s = head.scores(q, r, 6);
    const Tensor shifted = softmax(add(s, Tensor::full({2, 6}, 3.75)), 1);
    for (std::size_t b = 0; b < 2; ++b) {
      double total = 0.0;
      for (std::size_t k = 0; k < 6; ++k) {
        CHECK(res.weights.at(b, k) >= 0.0);
        CHECK(shifted.at(b, k) == doctest::Approx(res.weights.at(b, k)).epsilon(1e-12));
        total += res.weights.at(b, k);
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("mlp composition") {
  const Tensor x = Tensor::mat({{0.4, -0.3}});
  Mlp none;
  CHECK(none.forward(x).values()[1] == -0.3);

  LinearLayer l(Tensor::mat({{1, 2}, {3, 4}}, true), Tensor::vec({0.1, 0.2}, true));
  Mlp one;
  one.layers.push_back({l, Activation::kNone});
  const Tensor a = one.forward(x), b = l.forward(x);
  CHECK(a.at(0) == b.at(0));
  CHECK(a.at(1) == b.at(1));

  Mlp two;
  two.layers.push_back({l, Activation::kTanh});
  two.layers.push_back(
      {LinearLayer(Tensor::mat({{0.5, -1}}, true), Tensor::vec({0.25}, true)),
       Activation::kNone});
  const double h0 = std::tanh(0.4 * 1 + -0.3 * 2 + 0.1);
  const double h1 = std::tanh(0.4 * 3 + -0.3 * 4 + 0.2);
  CHECK(two.forward(x).item() == doctest::Approx(0.5 * h0 - h1 + 0.25).epsilon(1e-15));
}

TEST_CASE("embedding padding row survives an update") {
  Rng rng(4);
  EmbeddingTable table(6, 3, rng);
  for (std::size_t c = 0; c < 3; ++c) CHECK(table.rows.at(0, c) == 0.0);
  const std::vector<std::uint32_t> tokens = {0, 2, 0, 5};
  Optimizer opt(params_of(table));
  for (int step = 0; step < 3; ++step) {
    opt.zero_grad();
    backward(sum(tanh(table.lookup(tokens))));
    CHECK(table.rows.grad()[0] == 0.0);
    opt.step(0.1);
  }
  for (std::size_t c = 0; c < 3; ++c) CHECK(table.rows.at(0, c) == 0.0);
  CHECK(table.rows.at(2, 0) != 0.0);
}

TEST_CASE("layer gradients pass finite differences") {
  Rng rng(21);
  std::mt19937_64 gen(22);
  const Tensor x = random_tensor(gen, {3, 4}, false);
  const Tensor h = random_tensor(gen, {3, 5}, false, 0.5);

  LinearLayer lin(4, 2, rng);
  CHECK(grad_check([&] { return sum(tanh(lin.forward(x))); },
                   tensors(params_of(lin))) <= 1e-5);

  GruCell gru(4, 5, rng);
  CHECK(grad_check([&] { return sum(tanh(gru.step(x, h))); },
                   tensors(params_of(gru))) <= 1e-5);

  AttentionHead att(4, 5, 3, rng);
  const Tensor regions = random_tensor(gen, {3 * 4, 5}, false);
  CHECK(grad_check([&] { return sum(tanh(att.pool(x, regions, 4).pooled)); },
                   tensors(params_of(att))) <= 1e-5);

  Mlp mlp({4, 6, 2}, Activation::kTanh, Activation::kSigmoid, rng);
  CHECK(grad_check([&] { return sum(mlp.forward(x)); }, tensors(params_of(mlp))) <=
        1e-5);

  EmbeddingTable emb(7, 3, rng);
  const std::vector<std::uint32_t> tokens = {1, 6, 2, 3, 3};
  CHECK(grad_check([&] { return sum(tanh(emb.lookup(tokens))); },
                   tensors(params_of(emb))) <= 1e-5);
}
