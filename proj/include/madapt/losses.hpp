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
#include <optional>
#include <span>
#include <vector>

#include "madapt/tensor.hpp"

namespace madapt {

/// Gaussian kernel bandwidth: fixed, or the median pairwise Euclidean
/// distance of the pooled batch (recomputed per call, held constant for
/// differentiation).
struct KernelSpec {
  enum class Bandwidth { kFixed, kMedian };
  Bandwidth bandwidth = Bandwidth::kMedian;
  double sigma = 1.0;

  static KernelSpec fixed(double sigma);
  static KernelSpec median() { return {}; }
  bool operator==(const KernelSpec&) const = default;
};

/// exp(−‖x − y‖² / (2σ²))
double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double sigma);

/// Median of Euclidean distances over all unordered pairs of the pooled rows
/// of x [n×d] and y [m×d]. Falls back to 1 when the median is zero.
double median_bandwidth(std::span<const double> x, std::size_t n,
                        std::span<const double> y, std::size_t m,
                        std::size_t d);

/// Biased squared MMD with diagonal terms, evaluated as
///   sxx/(n·n) − 2·sxy/(n·m) + syy/(m·m)
/// where each s is a row-major double loop of kernel values. Never negative
/// beyond rounding.
double mmd_sq_value(std::span<const double> x, std::size_t n,
                    std::span<const double> y, std::size_t m, std::size_t d,
                    double sigma);

/// Differentiable squared MMD between the rows of x [n×d] and y [m×d].
/// The forward value is bitwise equal to mmd_sq_value with the resolved σ.
Tensor mmd_sq(const Tensor& x, const Tensor& y, const KernelSpec& kernel);
double resolve_sigma(const Tensor& x, const Tensor& y, const KernelSpec& kernel);

/// L_j: squared MMD between source and target joint embeddings.
Tensor loss_joint(const Tensor& e_s, const Tensor& e_t, const KernelSpec& kernel);

/// L_mm = γ_a·MMD²(v_s, v_t) + γ_b·MMD²(q_s, q_t); a is visual, b textual.
Tensor loss_multimodal(const Tensor& q_s, const Tensor& q_t, const Tensor& v_s,
                       const Tensor& v_t, double gamma_a, double gamma_b,
                       const KernelSpec& kernel);

/// Mean cross entropy −log softmax(logits)[label] over the rows.
Tensor cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels);

/// L_c = CE_target + γ_c·CE_source. The source term is omitted when
/// logits_s is undefined.
Tensor loss_classification(const Tensor& logits_s,
                           std::span<const std::uint32_t> labels_s,
                           const Tensor& logits_t,
                           std::span<const std::uint32_t> labels_t,
                           double gamma_c);

inline constexpr double kProbabilityClamp = 1e-7;

/// L_adv = −mean(log p_s) − mean(log(1 − p_t)), with p clamped to
/// [1e-7, 1 − 1e-7].
Tensor loss_adversarial(const Tensor& p_source, const Tensor& p_target);

struct LossWeights {
  double lambda_j = 0.025;
  double lambda_mm = 0.008;
  double lambda_adv = 0.003;
  double gamma_a = 0.8;  // visual
  double gamma_b = 1.0;  // textual
  double gamma_c = 0.001;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

struct LossBreakdown {
  double classification = 0.0;  // L_c
  double joint = 0.0;           // L_j
  double multimodal = 0.0;      // L_mm
  double adversarial = 0.0;     // L_adv
  double total = 0.0;           // L_c + λ_j L_j + λ_mm L_mm − λ_adv L_adv
};

/// Component losses of one step. Undefined tensors are absent terms.
struct LossParts {
  Tensor classification;
  Tensor joint;
  Tensor multimodal;
  Tensor adversarial;
};

struct Objective {
  /// What backward() runs on: L_c + λ_j L_j + λ_mm L_mm + L_adv. The
  /// −λ_adv coupling lives in the gradient reversal node in front of the
  /// discriminator, so the discriminator descends L_adv while the feature
  /// parameters receive −λ_adv ∂L_adv.
  Tensor backward_target;
  LossBreakdown breakdown;
};

Objective total_objective(const LossParts& parts, const LossWeights& weights);

}  // namespace madapt
