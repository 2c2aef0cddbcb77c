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

#include <random>
#include <vector>

#include "madapt/tensor.hpp"

namespace madapt::testing {

inline std::vector<double> normals(std::mt19937_64& gen, std::size_t n,
                                   double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

inline Tensor random_tensor(std::mt19937_64& gen, Shape shape,
                            bool requires_grad = true, double scale = 1.0) {
  const std::size_t n = shape_numel(shape);
  return Tensor::from(std::move(shape), normals(gen, n, scale), requires_grad);
}

}  // namespace madapt::testing
