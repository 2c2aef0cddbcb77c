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

#include "madapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "madapt/ops.hpp"
#include "madapt/train.hpp"

namespace madapt {

double vqa_accuracy(std::string_view predicted,
                    std::span<const std::string> answers) {
  if (answers.size() != kAnnotators) {
    throw std::invalid_argument("vqa_accuracy: expected 10 answers, got " +
                                std::to_string(answers.size()));
  }
  const std::string p = normalize_answer(predicted);
  std::array<bool, kAnnotators> hit{};
  int matches = 0;
  for (std::size_t k = 0; k < kAnnotators; ++k) {
    hit[k] = normalize_answer(answers[k]) == p;
    matches += hit[k];
  }
  // Integer numerator keeps the result exact for every match count.
  int total = 0;
  for (std::size_t k = 0; k < kAnnotators; ++k) {
    total += std::min(matches - static_cast<int>(hit[k]), 3);
  }
  return total / 30.0;
}

const char* EvalReport::csv_header() { return "category,accuracy,count"; }

void EvalReport::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  char buf[128];
  const std::pair<const char*, double> rows[] = {
      {"yes/no", yes_no}, {"number", number}, {"other", other},
      {"answerable", answerable}};
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%zu\n", rows[c].first,
                  rows[c].second, counts[c]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "overall,%.17g,%zu\n", overall, samples);
  out << buf;
}

EvalReport summarize(const Dataset& data, std::span<const double> accuracy) {
  if (accuracy.size() != data.size()) {
    throw std::invalid_argument("summarize: one accuracy per sample required");
  }
  EvalReport r;
  std::array<double, kCategoryCount> sums{};
  double all = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.samples[i].category);
    sums[c] += accuracy[i];
    ++r.counts[c];
    all += accuracy[i];
  }
  r.samples = data.size();
  auto avg = [&](std::size_t c) {
    return r.counts[c] ? sums[c] / static_cast<double>(r.counts[c]) : 0.0;
  };
  r.yes_no = avg(0);
  r.number = avg(1);
  r.other = avg(2);
  r.answerable = avg(3);
  r.overall = r.samples ? all / static_cast<double>(r.samples) : 0.0;
  return r;
}

namespace {

template <typename Predict>
EvalReport evaluate_with(const Dataset& data, const AnswerVocab& vocab,
                         std::size_t batch_size, Predict predict) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (vocab.size() == 0) throw std::invalid_argument("empty answer vocabulary");
  std::vector<double> acc(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const MultiModalBatch batch = make_batch(data, idx, nullptr);
    const std::vector<std::uint32_t> labels = predict(batch);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      acc[idx[i]] = vqa_accuracy(vocab.answer(labels[i]),
                                 data.samples[idx[i]].answers);
    }
  }
  return summarize(data, acc);
}

}  // namespace

EvalReport evaluate(const DualDomainModel& model, const Dataset& data,
                    const AnswerVocab& vocab, Domain domain,
                    std::size_t batch_size) {
  NoGradGuard no_grad;
  return evaluate_with(data, vocab, batch_size, [&](const MultiModalBatch& b) {
    return predict_answer(model.classify(model.encode(b).e, domain));
  });
}

std::vector<std::uint32_t> ensemble_predict(std::span<const Tensor> logits) {
  if (logits.empty()) throw std::invalid_argument("ensemble of zero models");
  const std::size_t rows = logits[0].rows(), cols = logits[0].cols();
  std::vector<double> mean_prob(rows * cols, 0.0);
  for (const auto& l : logits) {
    if (l.rows() != rows || l.cols() != cols) {
      throw ShapeError("ensemble_predict: logits " + shape_str(l.shape()) +
                       " vs " + shape_str(logits[0].shape()));
    }
    const Tensor p = softmax(l.detach(), 1);
    const auto v = p.values();
    for (std::size_t i = 0; i < v.size(); ++i) mean_prob[i] += v[i];
  }
  const double n = static_cast<double>(logits.size());
  for (double& x : mean_prob) x /= n;
  std::vector<std::uint32_t> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = static_cast<std::uint32_t>(
        argmax(std::span<const double>(mean_prob).subspan(r * cols, cols)));
  }
  return out;
}

std::vector<std::uint32_t> ensemble_predict(
    std::span<const DualDomainModel* const> models,
    const MultiModalBatch& batch, Domain domain) {
  NoGradGuard no_grad;
  std::vector<Tensor> logits;
  logits.reserve(models.size());
  for (const auto* m : models) {
    logits.push_back(m->classify(m->encode(batch).e, domain));
  }
  return ensemble_predict(logits);
}

EvalReport evaluate_ensemble(std::span<const DualDomainModel* const> models,
                             const Dataset& data, const AnswerVocab& vocab,
                             Domain domain, std::size_t batch_size) {
  return evaluate_with(data, vocab, batch_size, [&](const MultiModalBatch& b) {
    return ensemble_predict(models, b, domain);
  });
}

Tensor embed_dataset(const DualDomainModel& model, const Dataset& data,
                     std::size_t batch_size) {
  if (data.size() == 0) throw std::invalid_argument("embed_dataset: empty data");
  NoGradGuard no_grad;
  const std::size_t d = model.config().fusion_dim;
  std::vector<double> out;
  out.reserve(data.size() * d);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Encoded enc = model.encode(make_batch(data, idx, nullptr));
    const auto e = enc.e.values();
    out.insert(out.end(), e.begin(), e.end());
  }
  return Tensor::from({data.size(), d}, std::move(out));
}

namespace {

std::vector<double> pick_rows(const Tensor& x, const std::vector<std::size_t>& rows) {
  const std::size_t d = x.cols();
  const auto v = x.values();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (auto r : rows) out.insert(out.end(), v.begin() + r * d, v.begin() + (r + 1) * d);
  return out;
}

}  // namespace

ProbeResult probe_domain_gap(const Tensor& features_s, const Tensor& features_t,
                             const KernelSpec& kernel,
                             const ProbeOptions& options) {
  const std::size_t d = features_s.cols();
  if (features_t.cols() != d) {
    throw ShapeError("probe_domain_gap: feature widths " + std::to_string(d) +
                     " and " + std::to_string(features_t.cols()));
  }
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0) ||
      options.hidden == 0 || options.max_per_domain == 0) {
    throw std::invalid_argument("probe_domain_gap: invalid options");
  }
  const std::size_t per = std::min(
      {features_s.rows(), features_t.rows(), options.max_per_domain});
  if (per < 2) throw std::invalid_argument("probe_domain_gap: too few samples");

  Rng rng(options.seed, 0x9B0E);
  auto choose = [&](std::size_t n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    rng.shuffle(all);
    all.resize(per);
    return all;
  };
  // Subsample and split are paired: row i of both domains lands on the same
  // side, so rows present verbatim in both sets cannot leak a label into the
  // held-out half through memorization.
  const auto pick_s = choose(features_s.rows());
  const auto pick_t =
      features_t.rows() == features_s.rows() ? pick_s : choose(features_t.rows());
  const Tensor xs = Tensor::from({per, d}, pick_rows(features_s, pick_s));
  const Tensor xt = Tensor::from({per, d}, pick_rows(features_t, pick_t));

  ProbeResult result;
  result.mmd_sq = mmd_sq_value(xs.values(), per, xt.values(), per, d,
                               resolve_sigma(xs, xt, kernel));

  // Pooled rows: label 1 = source. Split 70/30 within each domain.
  const std::size_t n_train = std::max<std::size_t>(
      1, std::min(per - 1, static_cast<std::size_t>(
                               std::llround(options.train_fraction * per))));
  std::vector<std::size_t> order(per);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::vector<std::size_t>& os = order;
  const std::vector<std::size_t>& ot = order;

  auto gather = [&](std::size_t b, std::size_t e, std::vector<double>& feats,
                    std::vector<double>& labels) {
    const auto vs = xs.values(), vt = xt.values();
    for (std::size_t i = b; i < e; ++i) {
      feats.insert(feats.end(), vs.begin() + os[i] * d, vs.begin() + (os[i] + 1) * d);
      labels.push_back(1.0);
      feats.insert(feats.end(), vt.begin() + ot[i] * d, vt.begin() + (ot[i] + 1) * d);
      labels.push_back(0.0);
    }
  };
  std::vector<double> train_x, train_y, test_x, test_y;
  gather(0, n_train, train_x, train_y);
  gather(n_train, per, test_x, test_y);

  // Standardize with training statistics.
  std::vector<double> mu(d, 0.0), sd(d, 0.0);
  const std::size_t nt = train_y.size();
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t c = 0; c < d; ++c) mu[c] += train_x[i * d + c];
  for (auto& m : mu) m /= static_cast<double>(nt);
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      const double z = train_x[i * d + c] - mu[c];
      sd[c] += z * z;
    }
  for (auto& s : sd) s = std::sqrt(s / static_cast<double>(nt));
  auto standardize = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::size_t c = i % d;
      x[i] = sd[c] > 0.0 ? (x[i] - mu[c]) / sd[c] : 0.0;
    }
  };
  standardize(train_x);
  standardize(test_x);

  Mlp probe({d, options.hidden, 1}, Activation::kTanh, Activation::kSigmoid, rng);
  ParamList params;
  probe.collect("probe", params);
  Optimizer opt(params);
  const Tensor x = Tensor::from({nt, d}, train_x);
  const Tensor y = Tensor::from({nt, 1}, train_y);
  const Tensor one_minus_y = Tensor::from({nt, 1}, [&] {
    std::vector<double> v(nt);
    for (std::size_t i = 0; i < nt; ++i) v[i] = 1.0 - train_y[i];
    return v;
  }());
  constexpr double lo = kProbabilityClamp, hi = 1.0 - kProbabilityClamp;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const Tensor p = clamp(probe.forward(x), lo, hi);
    const Tensor bce = scale(
        mean(add(mul(y, log(p)),
                 mul(one_minus_y, log(sub(Tensor::scalar(1.0), p))))),
        -1.0);
    opt.zero_grad();
    backward(bce);
    opt.step(options.learning_rate);
  }

  NoGradGuard no_grad;
  const std::size_t ne = test_y.size();
  const Tensor p = probe.forward(Tensor::from({ne, d}, test_x));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ne; ++i) {
    correct += (p.at(i) >= 0.5) == (test_y[i] > 0.5);
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(ne);
  return result;
}

}  // namespace madapt
