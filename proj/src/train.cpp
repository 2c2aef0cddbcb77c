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

#include "madapt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "madapt/ops.hpp"

namespace madapt {

void Schedule::validate() const {
  if (!(warmup_start > 0.0) || !(warmup_end > 0.0) || !(decay > 0.0) ||
      decay_period == 0) {
    throw std::invalid_argument(
        "schedule: learning rates, decay and decay period must be positive");
  }
}

double lr_at(const Schedule& s, std::uint64_t iter) {
  if (iter < s.warmup_iters) {
    // Weighted form keeps the endpoints exact: iter 0 gives warmup_start.
    const double w = static_cast<double>(s.warmup_iters);
    const double i = static_cast<double>(iter);
    return (s.warmup_start * (w - i) + s.warmup_end * i) / w;
  }
  const std::uint64_t k = (iter - s.warmup_iters) / s.decay_period;
  double lr = s.warmup_end;
  for (std::uint64_t j = 0; j < k; ++j) lr *= s.decay;
  return lr;
}

Optimizer::Optimizer(ParamList params, Options options) : options_(options) {
  for (auto& p : params) {
    Slot s;
    s.param = p.tensor;
    s.first.assign(s.param.numel(), 0.0);
    if (options_.kind == OptimizerKind::kAdamax) {
      s.second.assign(s.param.numel(), 0.0);
    }
    slots_.push_back(std::move(s));
  }
}

void Optimizer::zero_grad() {
  for (auto& s : slots_) s.param.zero_grad();
}

void Optimizer::step(double lr) {
  ++steps_;
  for (auto& s : slots_) {
    if (!s.param.has_grad()) continue;
    const auto& g = s.param.node()->grad;
    if (std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; })) {
      continue;
    }
    auto w = s.param.mutable_values();
    ++s.t;
    if (options_.kind == OptimizerKind::kAdamax) {
      const double b1 = options_.beta1, b2 = options_.beta2;
      const double step = lr / (1.0 - std::pow(b1, static_cast<double>(s.t)));
      for (std::size_t i = 0; i < w.size(); ++i) {
        s.first[i] = b1 * s.first[i] + (1.0 - b1) * g[i];
        s.second[i] = std::max(b2 * s.second[i], std::abs(g[i]));
        w[i] -= step * s.first[i] / (s.second[i] + options_.eps);
      }
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        s.first[i] = options_.momentum * s.first[i] + g[i];
        w[i] -= lr * s.first[i];
      }
    }
  }
}

const char* RunRecord::csv_header() {
  return "iter,lr,loss_c,loss_j,loss_mm,loss_adv,total";
}

void RunRecord::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  char buf[512];
  for (const auto& r : iterations) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(r.iter), r.lr,
                  r.losses.classification, r.losses.joint, r.losses.multimodal,
                  r.losses.adversarial, r.losses.total);
    out << buf;
  }
}

namespace {

constexpr std::uint64_t kPrimaryStream = 0x7A12;
constexpr std::uint64_t kSourceStream = 0x50C3;

struct Auxiliary {
  const Dataset* data = nullptr;
  const AnswerVocab* vocab = nullptr;
  LossWeights weights;
  KernelSpec kernel;
  AdaptFlags flags = AdaptFlags::none();
};

std::vector<std::size_t> labeled_rows(const MultiModalBatch& b) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < b.size; ++i) {
    if (b.labels[i] != AnswerVocab::kOutOfVocab) rows.push_back(i);
  }
  return rows;
}

// Cross entropy over the labeled rows of a batch; undefined if none.
Tensor labeled_ce(const DualDomainModel& model, const Tensor& e,
                  const MultiModalBatch& b, Domain head) {
  const auto rows = labeled_rows(b);
  if (rows.empty()) return {};
  std::vector<std::uint32_t> labels;
  labels.reserve(rows.size());
  for (auto r : rows) labels.push_back(b.labels[r]);
  Tensor sel = e;
  if (rows.size() != b.size) {
    std::vector<std::uint32_t> idx(rows.begin(), rows.end());
    sel = gather_rows(e, idx);
  }
  return cross_entropy(model.classify(sel, head), labels);
}

bool uses_source(const Auxiliary& aux) {
  if (!aux.data) return false;
  const auto& w = aux.weights;
  const auto& f = aux.flags;
  return (f.multimodal_mmd && w.lambda_mm > 0.0 &&
          (w.gamma_a > 0.0 || w.gamma_b > 0.0)) ||
         (f.joint_mmd && w.lambda_j > 0.0) || f.discriminator ||
         (f.source_classification && w.gamma_c > 0.0);
}

RunRecord run_training(DualDomainModel& model, const Dataset& primary,
                       const AnswerVocab& primary_vocab, Domain head,
                       const Auxiliary& aux, const TrainOptions& options) {
  options.schedule.validate();
  if (primary.size() == 0) {
    throw std::invalid_argument("training data is empty");
  }
  if (options.batch_size == 0) {
    throw std::invalid_argument("batch size must be positive");
  }
  const bool with_source = uses_source(aux);
  if (with_source && aux.data->size() == 0) {
    throw std::invalid_argument("source data is empty");
  }

  RunRecord record;
  record.seed = options.seed;
  Optimizer opt(model.parameters(), options.optimizer);
  BatchStream primary_stream(primary.size(), options.batch_size,
                             splitmix64(options.seed ^ kPrimaryStream));
  std::optional<BatchStream> source_stream;
  if (with_source) {
    source_stream.emplace(aux.data->size(), options.batch_size,
                          splitmix64(options.seed ^ kSourceStream));
  }
  const auto& w = aux.weights;
  const auto& f = aux.flags;

  for (std::uint64_t it = 0; it < options.iterations; ++it) {
    const double lr = lr_at(options.schedule, it);
    Objective objective;
    try {
      const MultiModalBatch tb =
          make_batch(primary, primary_stream.next(), &primary_vocab);
      const Encoded et = model.encode(tb);
      LossParts parts;
      Tensor ce_t = labeled_ce(model, et.e, tb, head);

      if (with_source) {
        const MultiModalBatch sb =
            make_batch(*aux.data, source_stream->next(), aux.vocab);
        const Encoded es = model.encode(sb);
        Tensor ce_s;
        if (f.source_classification && w.gamma_c > 0.0) {
          ce_s = labeled_ce(model, es.e, sb, Domain::kSource);
        }
        if (ce_t.defined() && ce_s.defined()) {
          parts.classification = add(ce_t, scale(ce_s, w.gamma_c));
        } else if (ce_s.defined()) {
          parts.classification = scale(ce_s, w.gamma_c);
        } else {
          parts.classification = ce_t;
        }
        if (f.joint_mmd && w.lambda_j > 0.0) {
          parts.joint = loss_joint(es.e, et.e, aux.kernel);
        }
        if (f.multimodal_mmd && w.lambda_mm > 0.0) {
          parts.multimodal = loss_multimodal(es.q, et.q, es.v, et.v,
                                             w.gamma_a, w.gamma_b, aux.kernel);
        }
        if (f.discriminator) {
          parts.adversarial =
              loss_adversarial(model.discriminate(es.e, w.lambda_adv),
                               model.discriminate(et.e, w.lambda_adv));
        }
      } else {
        parts.classification = ce_t;
      }
      if (!parts.classification.defined()) {
        parts.classification = Tensor::scalar(0.0);
      }
      objective = total_objective(parts, w);
      if (!std::isfinite(objective.breakdown.total)) {
        throw NumericError("non-finite objective");
      }
      opt.zero_grad();
      if (objective.backward_target.requires_grad()) {
        backward(objective.backward_target);
        for (const auto& p : model.parameters()) {
          for (double g : p.tensor.node()->grad) {
            if (!std::isfinite(g)) {
              throw NumericError("non-finite gradient in " + p.name);
            }
          }
        }
        opt.step(lr);
      }
    } catch (const NumericError& e) {
      throw DivergenceError(e.what(), it);
    }
    record.iterations.push_back({it, lr, objective.breakdown});
    if (options.callback && options.callback_every &&
        (it + 1) % options.callback_every == 0) {
      options.callback(it + 1, record);
    }
  }
  return record;
}

}  // namespace

RunRecord pretrain_source(DualDomainModel& model, const Dataset& source,
                          const AnswerVocab& source_vocab,
                          const TrainOptions& options) {
  return run_training(model, source, source_vocab, Domain::kSource, {},
                      options);
}

RunRecord adapt(DualDomainModel& model, const Dataset& source,
                const AnswerVocab& source_vocab, const Dataset& target,
                const AnswerVocab& target_vocab, const LossWeights& weights,
                const KernelSpec& kernel, const AdaptFlags& flags,
                const TrainOptions& options) {
  if (flags == AdaptFlags::none()) {
    throw std::invalid_argument(
        "adapt: every loss flag is disabled; use finetune instead");
  }
  weights.validate();
  if (source.size() == 0 || target.size() == 0) {
    throw std::invalid_argument("adapt: both datasets must be nonempty");
  }
  if (model.config().target_answers != target_vocab.size() ||
      model.config().source_answers != source_vocab.size()) {
    throw std::invalid_argument(
        "adapt: classifier heads do not match the answer vocabularies");
  }
  Auxiliary aux;
  aux.data = &source;
  aux.vocab = &source_vocab;
  aux.weights = weights;
  aux.kernel = kernel;
  aux.flags = flags;
  return run_training(model, target, target_vocab, Domain::kTarget, aux,
                      options);
}

RunRecord finetune(DualDomainModel& model, const Dataset& target,
                   const AnswerVocab& target_vocab,
                   const TrainOptions& options) {
  if (model.config().target_answers != target_vocab.size()) {
    throw std::invalid_argument(
        "finetune: target head does not match the target vocabulary");
  }
  return run_training(model, target, target_vocab, Domain::kTarget, {},
                      options);
}

RunRecord train_target_only(DualDomainModel& model, const Dataset& target,
                            const AnswerVocab& target_vocab,
                            const TrainOptions& options) {
  return finetune(model, target, target_vocab, options);
}

}  // namespace madapt
