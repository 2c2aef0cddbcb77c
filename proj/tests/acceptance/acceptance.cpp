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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "madapt/checkpoint.hpp"
#include "madapt/config.hpp"
#include "madapt/experiments.hpp"
#include "madapt/gradcheck.hpp"
#include "madapt/losses.hpp"
#include "madapt/metrics.hpp"
#include "madapt/model.hpp"
#include "madapt/ops.hpp"
#include "madapt/train.hpp"

using namespace madapt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------
// Toy setup for the gradient criteria: 3 samples per domain.

struct Toy {
  Dataset source, target;
  AnswerVocab source_vocab, target_vocab;
  DualDomainModel model;
  MultiModalBatch sb, tb;
};

Toy make_toy(std::uint64_t seed) {
  GeneratorConfig g;
  g.feature_dim = 3;
  g.regions_per_image = 2;
  g.grid_cells = 2;
  g.question_types = 2;
  g.concepts = 2;
  g.filler_words = 4;
  g.max_question_length = 5;
  auto [src, tgt] = generate_domain_pair(g, ShiftConfig{}, 3, 3, seed);
  Toy t;
  t.source = std::move(src);
  t.target = std::move(tgt);
  t.source_vocab = build_vocab(t.source.samples, 50);
  t.target_vocab = build_vocab(t.target.samples, 50);
  ModelConfig c;
  c.token_vocab = t.source.token_vocab_size;
  c.embed_dim = 3;
  c.question_dim = 4;
  c.feature_dim = 3;
  c.regions = 2;
  c.grid_cells = 2;
  c.attention_dim = 3;
  c.grid_dim = 3;
  c.fusion_dim = 4;
  c.classifier_hidden = 4;
  c.discriminator_hidden = 3;
  c.source_answers = t.source_vocab.size();
  c.target_answers = t.target_vocab.size();
  t.model = DualDomainModel(c, seed);
  t.sb = make_batch(t.source, {0, 1, 2}, &t.source_vocab);
  t.tb = make_batch(t.target, {0, 1, 2}, &t.target_vocab);
  return t;
}

// Weights large enough that every term moves the gradient noticeably.
LossWeights toy_weights() { return {0.5, 0.4, 0.3, 0.8, 1.0, 0.2}; }

struct ToyLosses {
  Tensor classification, joint, multimodal, adversarial;
};

// Component losses. With `reversal` the discriminator reads the joint
// embedding through the gradient reversal node (the training graph);
// without it the discriminator reads e directly.
ToyLosses toy_losses(const Toy& t, const LossWeights& w, bool reversal) {
  const KernelSpec k = KernelSpec::fixed(1.3);
  const Encoded es = t.model.encode(t.sb), et = t.model.encode(t.tb);
  ToyLosses out;
  out.classification = loss_classification(
      t.model.classify(es.e, Domain::kSource), t.sb.labels,
      t.model.classify(et.e, Domain::kTarget), t.tb.labels, w.gamma_c);
  out.joint = loss_joint(es.e, et.e, k);
  out.multimodal = loss_multimodal(es.q, et.q, es.v, et.v, w.gamma_a, w.gamma_b, k);
  auto disc = [&](const Tensor& e) {
    return reversal ? t.model.discriminate(e, w.lambda_adv) : t.model.discriminator.forward(e);
  };
  out.adversarial = loss_adversarial(disc(es.e), disc(et.e));
  return out;
}

// L_c + λ_j L_j + λ_mm L_mm − λ_adv L_adv as one differentiable scalar.
Tensor toy_total(const Toy& t, const LossWeights& w) {
  const ToyLosses l = toy_losses(t, w, false);
  return add(add(add(l.classification, scale(l.joint, w.lambda_j)),
                 scale(l.multimodal, w.lambda_mm)),
             scale(l.adversarial, -w.lambda_adv));
}

bool is_discriminator(const std::string& name) {
  return name.rfind("discriminator.", 0) == 0;
}

Verdict criterion_gradient() {
  const auto t0 = Clock::now();
  Toy toy = make_toy(17);
  const LossWeights w = toy_weights();
  std::vector<Tensor> params;
  for (const auto& p : toy.model.parameters()) params.push_back(p.tensor);

  // (a) Autodiff of the objective against central differences.
  const double plain = grad_check([&] { return toy_total(toy, w); }, params);

  // (b) The training graph (reversal node, L_adv entering with +1) must give
  // the feature side exactly the objective's gradient and the discriminator
  // the gradient of +L_adv; both are checked against central differences.
  const ToyLosses routed = toy_losses(toy, w, true);
  const Objective obj = total_objective(
      {routed.classification, routed.joint, routed.multimodal, routed.adversarial}, w);
  for (auto& p : params) p.zero_grad();
  backward(obj.backward_target);
  const double identity_gap =
      std::abs(obj.breakdown.total - toy_total(toy, w).item());

  double worst_routed = 0.0;
  std::size_t checked = 0;
  const double h = 1e-6;
  for (const auto& p : toy.model.parameters()) {
    Tensor param = p.tensor;
    const auto analytic = param.grad();
    auto values = param.mutable_values();
    const bool disc = is_discriminator(p.name);
    auto f = [&] {
      return disc ? toy_losses(toy, w, false).adversarial.item() : toy_total(toy, w).item();
    };
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = f();
      values[i] = saved - h;
      const double down = f();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      worst_routed = std::max(worst_routed, std::abs(analytic[i] - numeric) /
                                                std::max(1.0, std::abs(analytic[i])));
      ++checked;
    }
    param.zero_grad();
  }
  const double elapsed = seconds_since(t0);
  const bool ok = plain <= 1e-5 && worst_routed <= 1e-5 && identity_gap <= 1e-12 &&
                  elapsed < 30.0;
  return {ok, std::to_string(checked) + " scalars; objective rel err " + fmt("%.2e", plain) +
                  ", training-graph rel err " + fmt("%.2e", worst_routed) + ", " +
                  fmt("%.2f s", elapsed)};
}

// ---------------------------------------------------------------------------

double mmd_double_loop(const std::vector<double>& x, std::size_t n,
                       const std::vector<double>& y, std::size_t m, std::size_t d,
                       double sigma) {
  auto block = [&](const std::vector<double>& a, std::size_t na,
                   const std::vector<double>& b, std::size_t nb) {
    double s = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t j = 0; j < nb; ++j) {
        double dist = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = a[i * d + c] - b[j * d + c];
          dist += diff * diff;
        }
        s += std::exp(-dist / (2.0 * sigma * sigma));
      }
    }
    return s;
  };
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return block(x, n, x, n) / (nn * nn) - 2.0 * block(x, n, y, m) / (nn * mm) +
         block(y, m, y, m) / (mm * mm);
}

Verdict criterion_mmd() {
  std::mt19937_64 gen(31337);
  std::uniform_int_distribution<std::size_t> size(1, 50), dim(1, 16);
  std::normal_distribution<double> normal;
  std::size_t exact = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size(gen), m = size(gen), d = dim(gen);
    std::vector<double> x(n * d), y(m * d);
    for (auto& v : x) v = normal(gen);
    const double shift = 0.5 * normal(gen);
    for (auto& v : y) v = normal(gen) + shift;
    const Tensor tx = Tensor::from({n, d}, x), ty = Tensor::from({m, d}, y);
    const bool median = trial % 2 == 1;
    const double sigma = median ? median_bandwidth(x, n, y, m, d) : 0.25 + 0.05 * trial;
    const KernelSpec k = median ? KernelSpec::median() : KernelSpec::fixed(sigma);
    exact += mmd_sq(tx, ty, k).item() == mmd_double_loop(x, n, y, m, d, sigma);
  }
  double worst_closed = 0.0;
  std::uniform_real_distribution<double> u(-3.0, 3.0), s(0.2, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(gen), b = u(gen), sigma = s(gen);
    const double v =
        mmd_sq(Tensor::mat({{a}}), Tensor::mat({{b}}), KernelSpec::fixed(sigma)).item();
    const double closed = 2.0 - 2.0 * std::exp(-(a - b) * (a - b) / (2.0 * sigma * sigma));
    worst_closed = std::max(worst_closed, std::abs(v - closed));
  }
  return {exact == 200 && worst_closed <= 1e-12,
          std::to_string(exact) + "/200 bitwise matches; singleton max abs err " +
              fmt("%.2e", worst_closed)};
}

Verdict criterion_grl() {
  Toy toy = make_toy(23);
  const double lambda = 0.37;
  auto grads = [&] {
    std::vector<std::vector<double>> g;
    for (const auto& p : toy.model.parameters()) {
      g.push_back(p.tensor.grad());
      Tensor(p.tensor).zero_grad();
    }
    return g;
  };
  const Encoded es = toy.model.encode(toy.sb), et = toy.model.encode(toy.tb);
  LossWeights w;
  w.lambda_adv = lambda;
  // Only L_adv is active; the classification slot is a constant zero.
  const Objective obj = total_objective(
      {Tensor::scalar(0.0), {}, {}, loss_adversarial(toy.model.discriminate(es.e, lambda),
                                                     toy.model.discriminate(et.e, lambda))},
      w);
  for (const auto& p : toy.model.parameters()) Tensor(p.tensor).zero_grad();
  backward(obj.backward_target);
  const auto with_grl = grads();
  const Encoded es2 = toy.model.encode(toy.sb), et2 = toy.model.encode(toy.tb);
  backward(loss_adversarial(toy.model.discriminator.forward(es2.e),
                            toy.model.discriminator.forward(et2.e)));
  const auto free = grads();

  const auto params = toy.model.parameters();
  double worst_feature = 0.0, worst_disc = 0.0;
  bool heads_silent = true;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool disc = is_discriminator(params[i].name);
    const bool head = params[i].name.rfind("classifier.", 0) == 0;
    for (std::size_t j = 0; j < free[i].size(); ++j) {
      if (head) {
        heads_silent = heads_silent && with_grl[i][j] == 0.0;
        continue;
      }
      const double expected = disc ? free[i][j] : -lambda * free[i][j];
      const double err = std::abs(with_grl[i][j] - expected) /
                         std::max(1.0, std::abs(expected));
      (disc ? worst_disc : worst_feature) = std::max(disc ? worst_disc : worst_feature, err);
    }
  }
  return {worst_feature <= 1e-12 && worst_disc <= 1e-12 && heads_silent,
          "feature-side rel err " + fmt("%.2e", worst_feature) + ", discriminator rel err " +
              fmt("%.2e", worst_disc)};
}

Verdict criterion_metric() {
  std::mt19937_64 gen(4242);
  const std::vector<std::string> pool{"yes", "no", "two", "blue", "dog", "unanswerable"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::size_t exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> answers(kAnnotators);
    for (auto& a : answers) a = pool[pick(gen)];
    const std::string pred = pool[pick(gen)];
    int thirds = 0;
    for (std::size_t out = 0; out < kAnnotators; ++out) {
      int matches = 0;
      for (std::size_t j = 0; j < kAnnotators; ++j)
        if (j != out && answers[j] == pred) ++matches;
      thirds += std::min(matches, 3);
    }
    exact += vqa_accuracy(pred, answers) == thirds / 30.0;
  }
  std::vector<std::string> two(kAnnotators, "no");
  two[0] = two[1] = "yes";
  const double v = vqa_accuracy("yes", two);
  return {exact == 1000 && v == 0.6,
          std::to_string(exact) + "/1000 exact; two-match case " + fmt("%.12g", v)};
}

Verdict criterion_schedule() {
  const Schedule s;
  const std::pair<std::uint64_t, double> expect[] = {
      {0, 0.001}, {1000, 0.0055}, {2000, 0.01}, {6000, 0.0015}, {10000, 0.000225}};
  bool ok = true;
  std::string detail;
  for (const auto& [it, lr] : expect) {
    const double got = lr_at(s, it);
    ok = ok && got == lr;
    detail += (detail.empty() ? "" : ", ") + std::to_string(it) + "->" + fmt("%.12g", got);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// Benchmark criteria share one set of seeded runs per direction.

struct SeedRuns {
  std::size_t parameters = 0;
  double target_only = 0, finetune = 0, adapt = 0;
  double probe_before = 0, probe_after = 0;
  double lj_start = 0, lj_end = 0, lmm_start = 0, lmm_end = 0;
  double adapt_quarter = 0, target_only_half = 0;
};

// Mean of the last `tail` recorded values of one loss column.
double tail_mean(const RunRecord& r, double LossBreakdown::*field, std::size_t tail) {
  const std::size_t n = r.iterations.size();
  const std::size_t from = n > tail ? n - tail : 0;
  double s = 0.0;
  for (std::size_t i = from; i < n; ++i) s += r.iterations[i].losses.*field;
  return s / static_cast<double>(n - from);
}

std::vector<SeedRuns> run_direction(const ExperimentConfig& c, bool forward, double* secs) {
  const auto t0 = Clock::now();
  const Benchmark b = generate_benchmark(c);
  std::vector<SeedRuns> out;
  const AdaptFlags full{true, true, true, true};
  for (std::size_t k = 0; k < c.seeds; ++k) {
    const std::uint64_t seed = c.seed + k;
    SeedRuns r;
    auto acc = [&](const DualDomainModel& m) {
      return evaluate(m, b.target_test, b.target_vocab, Domain::kTarget).overall;
    };
    const DualDomainModel pre = pretrained_model(c, b, seed);
    r.parameters = pre.parameter_count();
    r.target_only = acc(train_method(c, b, Method::kTargetOnly, nullptr, full, seed).model);
    r.finetune = acc(train_method(c, b, Method::kFinetune, &pre, full, seed).model);
    const TrainedModel da = train_method(c, b, Method::kAdapt, &pre, full, seed);
    r.adapt = acc(da.model);
    if (forward) {
      ProbeOptions po;
      po.seed = seed;
      r.probe_before = probe_domain_gap(embed_dataset(pre, b.source_test),
                                        embed_dataset(pre, b.target_test), c.kernel, po)
                           .accuracy;
      r.probe_after = probe_domain_gap(embed_dataset(da.model, b.source_test),
                                       embed_dataset(da.model, b.target_test), c.kernel, po)
                          .accuracy;
      const auto& it = da.run.iterations;
      r.lj_start = it.front().losses.joint;
      r.lmm_start = it.front().losses.multimodal;
      r.lj_end = tail_mean(da.run, &LossBreakdown::joint, 20);
      r.lmm_end = tail_mean(da.run, &LossBreakdown::multimodal, 20);

      const Dataset quarter = split_fraction(b.target_train, 0.25, seed);
      const Dataset half = split_fraction(b.target_train, 0.5, seed);
      r.adapt_quarter =
          acc(train_method(c, b, Method::kAdapt, &pre, full, seed, &quarter).model);
      r.target_only_half =
          acc(train_method(c, b, Method::kTargetOnly, nullptr, full, seed, &half).model);
    }
    std::printf("  [%s seed %llu] TO %.4f FT %.4f DA %.4f", forward ? "a->b" : "b->a",
                static_cast<unsigned long long>(seed), r.target_only, r.finetune, r.adapt);
    if (forward) {
      std::printf(" | probe %.4f -> %.4f | L_j %.4g -> %.4g | L_mm %.4g -> %.4g"
                  " | DA@1/4 %.4f TO@1/2 %.4f",
                  r.probe_before, r.probe_after, r.lj_start, r.lj_end, r.lmm_start,
                  r.lmm_end, r.adapt_quarter, r.target_only_half);
    }
    std::printf(" [%.0f s]\n", seconds_since(t0));
    std::fflush(stdout);
    out.push_back(r);
  }
  *secs = seconds_since(t0);
  return out;
}

template <typename F>
double mean_field(const std::vector<SeedRuns>& runs, F f) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(f(r));
  return mean_of(v);
}

Verdict ordering_verdict(const std::vector<SeedRuns>& runs) {
  const double to = mean_field(runs, [](const SeedRuns& r) { return r.target_only; });
  const double ft = mean_field(runs, [](const SeedRuns& r) { return r.finetune; });
  const double da = mean_field(runs, [](const SeedRuns& r) { return r.adapt; });
  const double gap = 100.0 * (da - ft);
  return {to < ft && ft < da && gap >= 1.0,
          "mean over " + std::to_string(runs.size()) + " seeds: TO " + fmt("%.4f", to) +
              " FT " + fmt("%.4f", ft) + " DA " + fmt("%.4f", da) + ", DA-FT " +
              fmt("%+.2f", gap) + " points"};
}

// ---------------------------------------------------------------------------

std::string run_csv(const RunRecord& r) {
  std::ostringstream out;
  r.write_csv(out);
  return out.str();
}

ExperimentConfig small_benchmark(const ExperimentConfig& base) {
  ExperimentConfig c = base;
  c.n_source = 400;
  c.n_target = 200;
  c.n_test = 200;
  c.iterations = 40;
  c.pretrain_iterations = 40;
  c.batch_size = 32;
  return c;
}

Verdict criterion_determinism(const ExperimentConfig& base) {
  const ExperimentConfig c = small_benchmark(base);
  const Benchmark b = generate_benchmark(c);
  const AdaptFlags full{true, true, true, true};
  auto once = [&] {
    const DualDomainModel pre = pretrained_model(c, b, 3);
    return train_method(c, b, Method::kAdapt, &pre, full, 3);
  };
  const TrainedModel first = once();
  const TrainedModel second = once();
  const bool same_run = run_csv(first.run) == run_csv(second.run);

  const auto path = std::filesystem::temp_directory_path() / "madapt_acceptance.ckpt";
  save_checkpoint(first.model, print_config(c), path);
  const LoadedCheckpoint loaded = load_checkpoint(path, first.model.config());
  std::filesystem::remove(path);
  const bool same_eval =
      evaluate(loaded.model, b.target_test, b.target_vocab, Domain::kTarget) ==
      evaluate(first.model, b.target_test, b.target_vocab, Domain::kTarget);
  return {same_run && same_eval && loaded.config_echo == print_config(c),
          std::string("run.csv ") + (same_run ? "identical" : "differs") +
              ", reloaded EvalReport " + (same_eval ? "identical" : "differs")};
}

Verdict criterion_reduction(const ExperimentConfig& base) {
  ExperimentConfig c = small_benchmark(base);
  c.weights.gamma_c = 0.0;
  const Benchmark b = generate_benchmark(c);
  const DualDomainModel pre = pretrained_model(c, b, 5);
  AdaptFlags off = AdaptFlags::none();
  off.source_classification = true;
  const TrainedModel ft = train_method(c, b, Method::kFinetune, &pre, off, 5);
  const TrainedModel da = train_method(c, b, Method::kAdapt, &pre, off, 5);
  const bool same = run_csv(ft.run) == run_csv(da.run);
  return {same, std::to_string(da.run.iterations.size()) + " iterations, trajectories " +
                    (same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"madapt acceptance suite"};
  std::string config_path = MADAPT_BENCHMARK_CONFIG;
  std::size_t seeds = 0;
  std::vector<int> only;
  app.add_option("--config", config_path, "benchmark configuration file");
  app.add_option("--seeds", seeds, "override the number of seeds");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open " + config_path);
    std::stringstream text;
    text << in.rdbuf();
    config = parse_config(text.str());
    if (seeds) config.seeds = seeds;
    // The suite generates its own data, like the experiment modes.
    config.mode = Mode::kAblate;
    validate_config(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
  auto wanted = [&](int n) {
    return only.empty() || std::find(only.begin(), only.end(), n) != only.end();
  };

  std::vector<std::pair<int, Verdict>> results;
  auto record = [&](int n, const char* title, Verdict v) {
    std::printf("criterion %2d: %s  %s (%s)\n", n, v.pass ? "PASS" : "FAIL", title,
                v.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(n, std::move(v));
  };

  if (wanted(1)) record(1, "gradient oracle", criterion_gradient());
  if (wanted(2)) record(2, "MMD oracle", criterion_mmd());
  if (wanted(3)) record(3, "GRL routing", criterion_grl());
  if (wanted(4)) record(4, "metric oracle", criterion_metric());
  if (wanted(5)) record(5, "schedule", criterion_schedule());

  if (wanted(6) || wanted(7) || wanted(8)) {
    ExperimentConfig c = config;
    c.direction = Direction::kForward;
    double secs = 0.0;
    const auto runs = run_direction(c, true, &secs);
    if (wanted(6)) {
      Verdict v = ordering_verdict(runs);
      v.detail += ", direction a->b, " + std::to_string(runs.front().parameters) +
                  " parameters, " + fmt("%.0f s", secs) + " incl. criteria 7-8 runs";
      record(6, "directional adaptation", v);
    }
    if (wanted(7)) {
      const double da = mean_field(runs, [](const SeedRuns& r) { return r.adapt_quarter; });
      const double to = mean_field(runs, [](const SeedRuns& r) { return r.target_only_half; });
      record(7, "fraction study",
             {da >= to, "DA@1/4 " + fmt("%.4f", da) + " vs TO@1/2 " + fmt("%.4f", to)});
    }
    if (wanted(8)) {
      const double before = mean_field(runs, [](const SeedRuns& r) { return r.probe_before; });
      const double after = mean_field(runs, [](const SeedRuns& r) { return r.probe_after; });
      const double lj = mean_field(runs, [](const SeedRuns& r) { return r.lj_end / r.lj_start; });
      const double lmm =
          mean_field(runs, [](const SeedRuns& r) { return r.lmm_end / r.lmm_start; });
      double worst_lj = 0.0, worst_lmm = 0.0;
      for (const auto& r : runs) {
        worst_lj = std::max(worst_lj, r.lj_end / r.lj_start);
        worst_lmm = std::max(worst_lmm, r.lmm_end / r.lmm_start);
      }
      record(8, "alignment effect",
             {after < before && worst_lj <= 0.5 && worst_lmm <= 0.5,
              "probe " + fmt("%.4f", before) + " -> " + fmt("%.4f", after) +
                  "; end/start L_j mean " + fmt("%.3f", lj) + " worst " +
                  fmt("%.3f", worst_lj) + ", L_mm mean " + fmt("%.3f", lmm) + " worst " +
                  fmt("%.3f", worst_lmm)});
    }
  }
  if (wanted(9)) {
    ExperimentConfig c = config;
    c.direction = Direction::kReverse;
    double secs = 0.0;
    const auto runs = run_direction(c, false, &secs);
    Verdict v = ordering_verdict(runs);
    v.detail += ", direction b->a, " + fmt("%.0f s", secs);
    record(9, "reverse direction", v);
  }
  if (wanted(10)) record(10, "determinism and persistence", criterion_determinism(config));
  if (wanted(11)) record(11, "reduction identity", criterion_reduction(config));

  const auto failed = std::count_if(results.begin(), results.end(),
                                    [](const auto& r) { return !r.second.pass; });
  std::printf("%zu of %zu criteria passed\n", results.size() - failed, results.size());
  return failed ? 1 : 0;
}
