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

#include "madapt/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

namespace madapt {

namespace {

constexpr std::pair<Mode, std::string_view> kModes[] = {
    {Mode::kGenData, "gen-data"},       {Mode::kTrainSource, "train-source"},
    {Mode::kAdapt, "adapt"},            {Mode::kFinetune, "finetune"},
    {Mode::kTargetOnly, "target-only"}, {Mode::kEval, "eval"},
    {Mode::kProbe, "probe"},            {Mode::kAblate, "ablate"},
    {Mode::kFractionStudy, "fraction-study"},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Bad {
  std::string what;
};

double to_double(std::string_view v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() ||
      !std::isfinite(out)) {
    throw Bad{"expected a finite number"};
  }
  return out;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw Bad{"expected a nonnegative integer"};
  }
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Bad{"expected true or false"};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string_view key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

#define MADAPT_STR(name, member)                                          \
  Field{name, [](const ExperimentConfig& c) { return c.member; },         \
        [](ExperimentConfig& c, std::string_view v) { c.member = std::string(v); }}
#define MADAPT_DBL(name, member)                                          \
  Field{name, [](const ExperimentConfig& c) { return fmt(c.member); },    \
        [](ExperimentConfig& c, std::string_view v) { c.member = to_double(v); }}
#define MADAPT_INT(name, member)                                          \
  Field{name,                                                             \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }, \
        [](ExperimentConfig& c, std::string_view v) {                     \
          c.member = static_cast<decltype(c.member)>(to_u64(v));          \
        }}
#define MADAPT_BOOL(name, member)                                         \
  Field{name,                                                             \
        [](const ExperimentConfig& c) {                                   \
          return std::string(c.member ? "true" : "false");                \
        },                                                                \
        [](ExperimentConfig& c, std::string_view v) { c.member = to_bool(v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"mode",
            [](const ExperimentConfig& c) { return std::string(mode_name(c.mode)); },
            [](ExperimentConfig& c, std::string_view v) {
              for (const auto& [m, name] : kModes) {
                if (name == v) {
                  c.mode = m;
                  return;
                }
              }
              throw Bad{"unknown mode '" + std::string(v) + "'"};
            }},
      MADAPT_STR("source_train", source_train),
      MADAPT_STR("target_train", target_train),
      MADAPT_STR("source_test", source_test),
      MADAPT_STR("target_test", target_test),
      MADAPT_STR("init_checkpoint", init_checkpoint),
      MADAPT_STR("checkpoint", checkpoint),
      MADAPT_STR("out", out),
      MADAPT_INT("embed_dim", model.embed_dim),
      MADAPT_INT("question_dim", model.question_dim),
      MADAPT_INT("attention_dim", model.attention_dim),
      MADAPT_INT("grid_dim", model.grid_dim),
      MADAPT_INT("fusion_dim", model.fusion_dim),
      MADAPT_INT("classifier_hidden", model.classifier_hidden),
      MADAPT_INT("discriminator_hidden", model.discriminator_hidden),
      MADAPT_INT("answer_cap", answer_cap),
      MADAPT_DBL("lambda_j", weights.lambda_j),
      MADAPT_DBL("lambda_mm", weights.lambda_mm),
      MADAPT_DBL("lambda_adv", weights.lambda_adv),
      MADAPT_DBL("gamma_v", weights.gamma_a),
      MADAPT_DBL("gamma_q", weights.gamma_b),
      MADAPT_DBL("gamma_c", weights.gamma_c),
      Field{"kernel_sigma",
            [](const ExperimentConfig& c) {
              return c.kernel.bandwidth == KernelSpec::Bandwidth::kMedian
                         ? std::string("median")
                         : fmt(c.kernel.sigma);
            },
            [](ExperimentConfig& c, std::string_view v) {
              if (v == "median") {
                c.kernel = KernelSpec::median();
                return;
              }
              const double s = to_double(v);
              if (!(s > 0.0)) throw Bad{"bandwidth must be positive or 'median'"};
              c.kernel = KernelSpec::fixed(s);
            }},
      MADAPT_DBL("lr_warmup_start", schedule.warmup_start),
      MADAPT_DBL("lr_warmup_end", schedule.warmup_end),
      MADAPT_INT("warmup_iters", schedule.warmup_iters),
      MADAPT_DBL("lr_decay", schedule.decay),
      MADAPT_INT("decay_period", schedule.decay_period),
      MADAPT_INT("iterations", iterations),
      MADAPT_INT("pretrain_iterations", pretrain_iterations),
      MADAPT_INT("batch_size", batch_size),
      MADAPT_INT("seed", seed),
      MADAPT_BOOL("deterministic", deterministic),
      Field{"optimizer",
            [](const ExperimentConfig& c) {
              return std::string(c.optimizer == OptimizerKind::kAdamax ? "adamax"
                                                                       : "sgd");
            },
            [](ExperimentConfig& c, std::string_view v) {
              if (v == "adamax") {
                c.optimizer = OptimizerKind::kAdamax;
              } else if (v == "sgd") {
                c.optimizer = OptimizerKind::kMomentumSgd;
              } else {
                throw Bad{"expected adamax or sgd"};
              }
            }},
      MADAPT_BOOL("use_modal_mmd", flags.multimodal_mmd),
      MADAPT_BOOL("use_joint_mmd", flags.joint_mmd),
      MADAPT_BOOL("use_discriminator", flags.discriminator),
      MADAPT_BOOL("use_source_ce", flags.source_classification),
      MADAPT_DBL("target_fraction", target_fraction),
      Field{"direction",
            [](const ExperimentConfig& c) {
              return std::string(c.direction == Direction::kForward ? "a->b"
                                                                    : "b->a");
            },
            [](ExperimentConfig& c, std::string_view v) {
              if (v == "a->b") {
                c.direction = Direction::kForward;
              } else if (v == "b->a") {
                c.direction = Direction::kReverse;
              } else {
                throw Bad{"expected a->b or b->a"};
              }
            }},
      MADAPT_INT("seeds", seeds),
      MADAPT_INT("ensemble_size", ensemble_size),
      MADAPT_INT("data_seed", data_seed),
      MADAPT_INT("n_source", n_source),
      MADAPT_INT("n_target", n_target),
      MADAPT_INT("n_test", n_test),
      MADAPT_INT("regions", generator.regions_per_image),
      MADAPT_INT("grid_cells", generator.grid_cells),
      MADAPT_INT("feature_dim", generator.feature_dim),
      MADAPT_INT("question_types", generator.question_types),
      MADAPT_INT("concepts", generator.concepts),
      MADAPT_INT("type_words", generator.type_words),
      MADAPT_INT("hint_words", generator.hint_words),
      MADAPT_INT("filler_words", generator.filler_words),
      MADAPT_INT("min_question_length", generator.min_question_length),
      MADAPT_INT("max_question_length", generator.max_question_length),
      MADAPT_DBL("hint_probability", generator.hint_probability),
      MADAPT_DBL("prototype_scale", generator.prototype_scale),
      MADAPT_DBL("key_scale", generator.key_scale),
      MADAPT_DBL("feature_noise", generator.feature_noise),
      MADAPT_DBL("grid_signal", generator.grid_signal),
      MADAPT_DBL("annotator_agreement", generator.annotator_agreement),
      MADAPT_DBL("visual_shift", shift.visual_shift),
      MADAPT_DBL("text_shift", shift.text_shift),
      MADAPT_DBL("covariance_scale", shift.covariance_scale),
      MADAPT_DBL("nuisance_scale", shift.nuisance_scale),
      MADAPT_INT("nuisance_rank", shift.nuisance_rank),
      MADAPT_DBL("label_skew", shift.label_skew),
      MADAPT_DBL("overlap", shift.overlap),
      MADAPT_DBL("unanswerable_fraction", shift.unanswerable_fraction),
  };
  return table;
}

#undef MADAPT_STR
#undef MADAPT_DBL
#undef MADAPT_INT
#undef MADAPT_BOOL

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

std::string_view mode_name(Mode m) {
  for (const auto& [mode, name] : kModes) {
    if (mode == m) return name;
  }
  return "unknown";
}

Mode parse_mode(std::string_view s) {
  for (const auto& [mode, name] : kModes) {
    if (name == s) return mode;
  }
  throw ConfigError("unknown mode '" + std::string(s) + "'", 0);
}

void set_config_value(ExperimentConfig& config, std::string_view key,
                      std::string_view value, std::size_t line) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown key '" + std::string(key) + "'", line);
  try {
    f->set(config, value);
  } catch (const Bad& b) {
    throw ConfigError("bad value '" + std::string(value) + "' for " +
                          std::string(key) + ": " + b.what,
                      line);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what(), line);
  }
}

ExperimentConfig parse_config(std::string_view text) {
  return parse_config(text, {});
}

ExperimentConfig parse_config(
    std::string_view text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig c;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected key=value", line_no);
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (const auto it = seen.find(key); it != seen.end()) {
      throw ConfigError("duplicate key '" + std::string(key) +
                            "' (first set on line " +
                            std::to_string(it->second) + ")",
                        line_no);
    }
    seen.emplace(std::string(key), line_no);
    set_config_value(c, key, trim(line.substr(eq + 1)), line_no);
  }
  for (const auto& [k, v] : overrides) set_config_value(c, k, v, 0);
  return c;
}

std::string print_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += '=';
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void validate_config(const ExperimentConfig& c) {
  auto need = [&](const std::string& path, const char* key) {
    if (path.empty()) {
      throw ConfigError(std::string("mode ") + std::string(mode_name(c.mode)) +
                            " requires " + key,
                        0);
    }
  };
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what, 0);
  };
  try {
    c.weights.validate();
    c.schedule.validate();
    c.shift.validate(c.generator.answer_count());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }
  check(c.batch_size > 0, "batch_size must be positive");
  check(c.answer_cap > 0, "answer_cap must be positive");
  check(c.target_fraction > 0.0 && c.target_fraction <= 1.0,
        "target_fraction must lie in (0, 1]");
  check(c.seeds > 0, "seeds must be positive");
  check(c.ensemble_size > 0, "ensemble_size must be positive");
  check(c.n_source > 0 && c.n_target > 0 && c.n_test > 0,
        "dataset sizes must be positive");
  check(c.generator.min_question_length >= 1 &&
            c.generator.min_question_length <= c.generator.max_question_length &&
            c.generator.max_question_length <= kMaxQuestionLength,
        "question lengths must satisfy 1 <= min <= max <= 24");
  const auto& m = c.model;
  check(m.embed_dim && m.question_dim && m.attention_dim && m.grid_dim &&
            m.fusion_dim && m.classifier_hidden && m.discriminator_hidden,
        "network widths must be positive");
  switch (c.mode) {
    case Mode::kGenData:
    case Mode::kAblate:
    case Mode::kFractionStudy:
      break;
    case Mode::kTrainSource:
      need(c.source_train, "source_train");
      break;
    case Mode::kAdapt:
      need(c.source_train, "source_train");
      need(c.target_train, "target_train");
      break;
    case Mode::kFinetune:
      need(c.source_train, "source_train");
      need(c.target_train, "target_train");
      break;
    case Mode::kTargetOnly:
      need(c.target_train, "target_train");
      break;
    case Mode::kEval:
      need(c.checkpoint, "checkpoint");
      need(c.source_train, "source_train");
      need(c.target_train, "target_train");
      need(c.target_test, "target_test");
      break;
    case Mode::kProbe:
      need(c.checkpoint, "checkpoint");
      need(c.source_train, "source_train");
      need(c.target_train, "target_train");
      need(c.source_test, "source_test");
      need(c.target_test, "target_test");
      break;
  }
}

}  // namespace madapt
