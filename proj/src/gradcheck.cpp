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

#include "madapt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace madapt {
namespace {

double scalar_of(const Tensor& t) {
  if (t.numel() != 1) {
    throw ShapeError("grad_check: function output is " + shape_str(t.shape()) +
                     ", expected a scalar");
  }
  return t.item();
}

}  // namespace

double grad_check(const std::function<Tensor()>& fn,
                  std::vector<Tensor> params, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grad_check: step must be > 0");
  for (auto& p : params) p.zero_grad();
  const Tensor out = fn();
  scalar_of(out);
  backward(out);
  double worst = 0.0;
  for (auto& p : params) {
    const auto analytic = p.grad();
    auto values = p.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = scalar_of(fn());
      values[i] = saved - step;
      const double down = scalar_of(fn());
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = std::abs(analytic[i] - numeric) /
                         std::max(1.0, std::abs(analytic[i]));
      worst = std::max(worst, err);
    }
    p.zero_grad();
  }
  return worst;
}

double grad_check(const std::function<Tensor(const Tensor&)>& fn,
                  Tensor point, double step) {
  return grad_check([&] { return fn(point); }, {point}, step);
}

}  // namespace madapt
