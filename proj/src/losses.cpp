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

#include "madapt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "madapt/ops.hpp"

namespace madapt {

KernelSpec KernelSpec::fixed(double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("kernel bandwidth must be positive");
  }
  return {Bandwidth::kFixed, sigma};
}

double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("kernel bandwidth must be positive");
  }
  if (x.size() != y.size()) {
    throw ShapeError("gaussian_kernel: vectors of length " +
                     std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  }
  double dist = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    dist += diff * diff;
  }
  return std::exp(-dist / (2.0 * sigma * sigma));
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMat = Eigen::Map<const RowMat>;
using MutMat = Eigen::Map<RowMat>;

// Squared distances between the rows of a and b, row-major [na × nb]. Each
// entry sums its coordinates in order c = 0..d-1; b is transposed so the
// inner loop runs across pairs and vectorizes without reassociation.
Buffer pair_sqdist(std::span<const double> a, std::size_t na,
                                std::span<const double> b, std::size_t nb,
                                std::size_t d) {
  Buffer bt(nb * d);
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t c = 0; c < d; ++c) bt[c * nb + j] = b[j * d + c];
  Buffer out(na * nb, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    double* row = out.data() + i * nb;
    for (std::size_t c = 0; c < d; ++c) {
      const double ac = a[i * d + c];
      const double* col = bt.data() + c * nb;
      for (std::size_t j = 0; j < nb; ++j) {
        const double diff = ac - col[j];
        row[j] += diff * diff;
      }
    }
  }
  return out;
}

// Row-major kernel matrix between the rows of a and b.
Buffer gram(std::span<const double> a, std::size_t na,
                         std::span<const double> b, std::size_t nb,
                         std::size_t d, double sigma) {
  Buffer k = pair_sqdist(a, na, b, nb, d);
  const double denom = 2.0 * sigma * sigma;
  for (double& v : k) v = std::exp(-v / denom);
  return k;
}

double total(const Buffer& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void check_sets(std::size_t n, std::size_t m, std::size_t dx, std::size_t dy) {
  if (n == 0 || m == 0) throw std::invalid_argument("mmd: empty sample set");
  if (dx != dy) {
    throw ShapeError("mmd: feature dimensions " + std::to_string(dx) +
                     " and " + std::to_string(dy) + " differ");
  }
}

}  // namespace

double median_bandwidth(std::span<const double> x, std::size_t n,
                        std::span<const double> y, std::size_t m,
                        std::size_t d) {
  const std::size_t total = n + m;
  Buffer pooled(x.begin(), x.begin() + n * d);
  pooled.insert(pooled.end(), y.begin(), y.begin() + m * d);
  const Buffer sq = pair_sqdist(pooled, total, pooled, total, d);
  std::vector<double> dists;
  dists.reserve(total * (total - 1) / 2);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = i + 1; j < total; ++j)
      dists.push_back(std::sqrt(sq[i * total + j]));
  if (dists.empty()) return 1.0;
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    const double lower = *std::max_element(dists.begin(), dists.begin() + mid);
    median = 0.5 * (lower + median);
  }
  return median > 0.0 ? median : 1.0;
}

double mmd_sq_value(std::span<const double> x, std::size_t n,
                    std::span<const double> y, std::size_t m, std::size_t d,
                    double sigma) {
  check_sets(n, m, d, d);
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("kernel bandwidth must be positive");
  }
  const double sxx = total(gram(x, n, x, n, d, sigma));
  const double sxy = total(gram(x, n, y, m, d, sigma));
  const double syy = total(gram(y, m, y, m, d, sigma));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return sxx / (nn * nn) - 2.0 * sxy / (nn * mm) + syy / (mm * mm);
}

double resolve_sigma(const Tensor& x, const Tensor& y,
                     const KernelSpec& kernel) {
  if (kernel.bandwidth == KernelSpec::Bandwidth::kFixed) {
    if (!(kernel.sigma > 0.0)) {
      throw std::invalid_argument("kernel bandwidth must be positive");
    }
    return kernel.sigma;
  }
  return median_bandwidth(x.values(), x.rows(), y.values(), y.rows(), x.cols());
}

Tensor mmd_sq(const Tensor& x, const Tensor& y, const KernelSpec& kernel) {
  const std::size_t n = x.rows(), m = y.rows(), d = x.cols();
  check_sets(n, m, d, y.cols());
  const double sigma = resolve_sigma(x, y, kernel);
  auto kxx = gram(x.values(), n, x.values(), n, d, sigma);
  auto kxy = gram(x.values(), n, y.values(), m, d, sigma);
  auto kyy = gram(y.values(), m, y.values(), m, d, sigma);
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  const double value =
      total(kxx) / (nn * nn) - 2.0 * total(kxy) / (nn * mm) + total(kyy) / (mm * mm);

  return make_result(
      "mmd_sq", {1}, {value}, {x, y},
      [=, kxx = std::move(kxx), kxy = std::move(kxy),
       kyy = std::move(kyy)](Node& self) {
        const double g = self.grad[0];
        const double inv_s2 = 1.0 / (sigma * sigma);
        const ConstMat xm(self.inputs[0]->value.data(), n, d);
        const ConstMat ym(self.inputs[1]->value.data(), m, d);
        const ConstMat kxx_m(kxx.data(), n, n);
        const ConstMat kxy_m(kxy.data(), n, m);
        const ConstMat kyy_m(kyy.data(), m, m);
        // With ∂k(a,b)/∂a = −k(a,b)(a − b)/σ², each kernel block K between
        // rows A and B contributes rowsum(K)⊙A − K·B.
        if (self.inputs[0]->requires_grad) {
          MutMat gx(self.inputs[0]->grad_buffer().data(), n, d);
          const double cxx = -2.0 * g * inv_s2 / (nn * nn);
          const double cxy = 2.0 * g * inv_s2 / (nn * mm);
          gx += cxx * (kxx_m.rowwise().sum().asDiagonal() * xm - kxx_m * xm);
          gx += cxy * (kxy_m.rowwise().sum().asDiagonal() * xm - kxy_m * ym);
        }
        if (self.inputs[1]->requires_grad) {
          MutMat gy(self.inputs[1]->grad_buffer().data(), m, d);
          const double cyy = -2.0 * g * inv_s2 / (mm * mm);
          const double cxy = 2.0 * g * inv_s2 / (nn * mm);
          gy += cyy * (kyy_m.rowwise().sum().asDiagonal() * ym - kyy_m * ym);
          gy += cxy * (kxy_m.colwise().sum().transpose().asDiagonal() * ym -
                       kxy_m.transpose() * xm);
        }
      });
}

Tensor loss_joint(const Tensor& e_s, const Tensor& e_t,
                  const KernelSpec& kernel) {
  return mmd_sq(e_s, e_t, kernel);
}

Tensor loss_multimodal(const Tensor& q_s, const Tensor& q_t, const Tensor& v_s,
                       const Tensor& v_t, double gamma_a, double gamma_b,
                       const KernelSpec& kernel) {
  if (!(gamma_a >= 0.0 && gamma_b >= 0.0)) {
    throw std::invalid_argument("modality weights must be nonnegative");
  }
  return add(scale(mmd_sq(v_s, v_t, kernel), gamma_a),
             scale(mmd_sq(q_s, q_t, kernel), gamma_b));
}

Tensor cross_entropy(const Tensor& logits,
                     std::span<const std::uint32_t> labels) {
  return scale(mean(pick(log_softmax(logits, 1), labels)), -1.0);
}

Tensor loss_classification(const Tensor& logits_s,
                           std::span<const std::uint32_t> labels_s,
                           const Tensor& logits_t,
                           std::span<const std::uint32_t> labels_t,
                           double gamma_c) {
  if (!(gamma_c >= 0.0)) {
    throw std::invalid_argument("gamma_c must be nonnegative");
  }
  const Tensor target = cross_entropy(logits_t, labels_t);
  if (!logits_s.defined()) return target;
  return add(target, scale(cross_entropy(logits_s, labels_s), gamma_c));
}

Tensor loss_adversarial(const Tensor& p_source, const Tensor& p_target) {
  constexpr double lo = kProbabilityClamp, hi = 1.0 - kProbabilityClamp;
  const Tensor ls = mean(log(clamp(p_source, lo, hi)));
  const Tensor lt =
      mean(log(sub(Tensor::scalar(1.0), clamp(p_target, lo, hi))));
  return scale(add(ls, lt), -1.0);
}

void LossWeights::validate() const {
  for (double w : {lambda_j, lambda_mm, lambda_adv, gamma_a, gamma_b, gamma_c}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("loss weights must be finite and nonnegative");
    }
  }
}

Objective total_objective(const LossParts& parts, const LossWeights& weights) {
  weights.validate();
  if (!parts.classification.defined()) {
    throw std::invalid_argument("total_objective: classification loss missing");
  }
  Objective out;
  LossBreakdown& b = out.breakdown;
  b.classification = parts.classification.item();
  Tensor t = parts.classification;
  if (parts.joint.defined()) {
    b.joint = parts.joint.item();
    t = add(t, scale(parts.joint, weights.lambda_j));
  }
  if (parts.multimodal.defined()) {
    b.multimodal = parts.multimodal.item();
    t = add(t, scale(parts.multimodal, weights.lambda_mm));
  }
  if (parts.adversarial.defined()) {
    b.adversarial = parts.adversarial.item();
    t = add(t, parts.adversarial);
  }
  b.total = b.classification + weights.lambda_j * b.joint +
            weights.lambda_mm * b.multimodal -
            weights.lambda_adv * b.adversarial;
  out.backward_target = t;
  return out;
}

}  // namespace madapt
