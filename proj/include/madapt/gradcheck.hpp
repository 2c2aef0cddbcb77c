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

#include <functional>
#include <vector>

#include "madapt/tensor.hpp"

namespace madapt {

/// Compares reverse-mode gradients against central differences.
///
/// `fn` must rebuild its graph from the current parameter values on every
/// call and return a scalar. Returns the maximum over all coordinates of
/// |analytic − numeric| / max(1, |analytic|). Parameter grads are zeroed
/// before and after the check.
double grad_check(const std::function<Tensor()>& fn,
                  std::vector<Tensor> params, double step = 1e-6);

/// Single-point form: `fn` receives `point` (a leaf that requires grad).
double grad_check(const std::function<Tensor(const Tensor&)>& fn,
                  Tensor point, double step = 1e-6);

}  // namespace madapt
