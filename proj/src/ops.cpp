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

#include "madapt/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

namespace madapt {
namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

struct View2 {
  std::size_t r, c;
};

View2 view2(const Tensor& t) { return {t.rows(), t.cols()}; }

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   shape_str(a.shape()) + " and " + shape_str(b.shape()));
}

// Maps a user axis onto the 2-D view. Rank-1 tensors only have axis 0,
// which is the column axis of their 1×n view.
int view_axis(const Tensor& t, int axis, const char* op) {
  if (t.rank() == 1) {
    if (axis != 0) {
      throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                       " out of range for " + shape_str(t.shape()));
    }
    return 1;
  }
  if (axis != 0 && axis != 1) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for " + shape_str(t.shape()));
  }
  (void)t.rows();
  return axis;
}

Buffer* grad_of(Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  return in.requires_grad ? &in.grad_buffer() : nullptr;
}

// Elementwise op whose derivative is a function of input and output value.
template <typename F, typename D>
Tensor unary(const char* op, const Tensor& x, F f, D dfdx) {
  Buffer out(x.numel());
  const auto in = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result(op, x.shape(), std::move(out), {x}, [dfdx](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& xin = self.inputs[0]->value;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      (*gx)[i] += self.grad[i] * dfdx(xin[i], self.value[i]);
    }
  });
}

std::size_t bdim(std::size_t x, std::size_t y, const char* op,
                 const Tensor& a, const Tensor& b) {
  if (x == y || y == 1) return x;
  if (x == 1) return y;
  mismatch(op, a, b);
}

// Broadcasting binary op; da/db give ∂out/∂a and ∂out/∂b from (a, b).
template <typename F, typename DA, typename DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, DA da,
              DB db) {
  if (a.shape() == b.shape()) {
    const auto av = a.values();
    const auto bv = b.values();
    Buffer out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
    return make_result(op, a.shape(), std::move(out), {a, b},
                       [da, db](Node& self) {
                         const auto& x = self.inputs[0]->value;
                         const auto& y = self.inputs[1]->value;
                         if (auto* g = grad_of(self, 0)) {
                           for (std::size_t i = 0; i < x.size(); ++i)
                             (*g)[i] += self.grad[i] * da(x[i], y[i]);
                         }
                         if (auto* g = grad_of(self, 1)) {
                           for (std::size_t i = 0; i < x.size(); ++i)
                             (*g)[i] += self.grad[i] * db(x[i], y[i]);
                         }
                       });
  }
  const View2 va = view2(a);
  const View2 vb = view2(b);
  const std::size_t r = bdim(va.r, vb.r, op, a, b);
  const std::size_t c = bdim(va.c, vb.c, op, a, b);
  Shape shape = (a.rank() <= 1 && b.rank() <= 1 && r == 1) ? Shape{c}
                                                            : Shape{r, c};
  auto ia = [va](std::size_t i, std::size_t j) {
    return (va.r == 1 ? 0 : i) * va.c + (va.c == 1 ? 0 : j);
  };
  auto ib = [vb](std::size_t i, std::size_t j) {
    return (vb.r == 1 ? 0 : i) * vb.c + (vb.c == 1 ? 0 : j);
  };
  const auto av = a.values();
  const auto bv = b.values();
  Buffer out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out[i * c + j] = f(av[ia(i, j)], bv[ib(i, j)]);
  return make_result(
      op, std::move(shape), std::move(out), {a, b},
      [=](Node& self) {
        const auto& x = self.inputs[0]->value;
        const auto& y = self.inputs[1]->value;
        auto* ga = grad_of(self, 0);
        auto* gb = grad_of(self, 1);
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            const double g = self.grad[i * c + j];
            const double xa = x[ia(i, j)];
            const double yb = y[ib(i, j)];
            if (ga) (*ga)[ia(i, j)] += g * da(xa, yb);
            if (gb) (*gb)[ib(i, j)] += g * db(xa, yb);
          }
        }
      });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const View2 va = view2(a);
  const View2 vb = view2(b);
  if (va.c != vb.r) mismatch("matmul", a, b);
  Buffer out(va.r * vb.c);
  MutMap(out.data(), va.r, vb.c).noalias() =
      ConstMap(a.values().data(), va.r, va.c) *
      ConstMap(b.values().data(), vb.r, vb.c);
  return make_result("matmul", {va.r, vb.c}, std::move(out), {a, b},
                     [va, vb](Node& self) {
                       ConstMap g(self.grad.data(), va.r, vb.c);
                       if (auto* ga = grad_of(self, 0)) {
                         MutMap(ga->data(), va.r, va.c).noalias() +=
                             g * ConstMap(self.inputs[1]->value.data(), vb.r,
                                          vb.c)
                                     .transpose();
                       }
                       if (auto* gb = grad_of(self, 1)) {
                         MutMap(gb->data(), vb.r, vb.c).noalias() +=
                             ConstMap(self.inputs[0]->value.data(), va.r, va.c)
                                 .transpose() *
                             g;
                       }
                     });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  const View2 va = view2(a);
  const View2 vb = view2(b);
  if (va.c != vb.c) mismatch("matmul_nt", a, b);
  Buffer out(va.r * vb.r);
  MutMap(out.data(), va.r, vb.r).noalias() =
      ConstMap(a.values().data(), va.r, va.c) *
      ConstMap(b.values().data(), vb.r, vb.c).transpose();
  return make_result("matmul_nt", {va.r, vb.r}, std::move(out), {a, b},
                     [va, vb](Node& self) {
                       ConstMap g(self.grad.data(), va.r, vb.r);
                       if (auto* ga = grad_of(self, 0)) {
                         MutMap(ga->data(), va.r, va.c).noalias() +=
                             g * ConstMap(self.inputs[1]->value.data(), vb.r,
                                          vb.c);
                       }
                       if (auto* gb = grad_of(self, 1)) {
                         MutMap(gb->data(), vb.r, vb.c).noalias() +=
                             g.transpose() *
                             ConstMap(self.inputs[0]->value.data(), va.r, va.c);
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor scale(const Tensor& x, double s) {
  return unary(
      "scale", x, [s](double v) { return s * v; },
      [s](double, double) { return s; });
}

Tensor concat(const std::vector<Tensor>& xs, int axis) {
  if (xs.empty()) throw ShapeError("concat: no inputs");
  const int ax = view_axis(xs.front(), axis, "concat");
  bool all_rank1 = true;
  std::vector<View2> views;
  for (const auto& x : xs) {
    all_rank1 = all_rank1 && x.rank() == 1;
    views.push_back(view2(x));
  }
  std::size_t r = views[0].r, c = views[0].c;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (ax == 1 ? views[k].r != r : views[k].c != c) {
      mismatch("concat", xs[0], xs[k]);
    }
    (ax == 1 ? c : r) += ax == 1 ? views[k].c : views[k].r;
  }
  Buffer out(r * c);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto v = xs[k].values();
    const View2 vk = views[k];
    for (std::size_t i = 0; i < vk.r; ++i)
      for (std::size_t j = 0; j < vk.c; ++j) {
        const std::size_t oi = ax == 0 ? i + offset : i;
        const std::size_t oj = ax == 1 ? j + offset : j;
        out[oi * c + oj] = v[i * vk.c + j];
      }
    offset += ax == 0 ? vk.r : vk.c;
  }
  Shape shape = (all_rank1 && ax == 1) ? Shape{c} : Shape{r, c};
  return make_result(
      "concat", std::move(shape), std::move(out), xs,
      [views, ax, c](Node& self) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < views.size(); ++k) {
          const View2 vk = views[k];
          if (auto* g = grad_of(self, k)) {
            for (std::size_t i = 0; i < vk.r; ++i)
              for (std::size_t j = 0; j < vk.c; ++j) {
                const std::size_t oi = ax == 0 ? i + offset : i;
                const std::size_t oj = ax == 1 ? j + offset : j;
                (*g)[i * vk.c + j] += self.grad[oi * c + oj];
              }
          }
          offset += ax == 0 ? vk.r : vk.c;
        }
      });
}

Tensor slice(const Tensor& x, int axis, std::size_t begin, std::size_t end) {
  const int ax = view_axis(x, axis, "slice");
  const View2 v = view2(x);
  const std::size_t extent = ax == 0 ? v.r : v.c;
  if (begin >= end || end > extent) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") invalid for " +
                     shape_str(x.shape()));
  }
  const std::size_t r = ax == 0 ? end - begin : v.r;
  const std::size_t c = ax == 1 ? end - begin : v.c;
  const std::size_t r0 = ax == 0 ? begin : 0;
  const std::size_t c0 = ax == 1 ? begin : 0;
  const auto in = x.values();
  Buffer out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out[i * c + j] = in[(i + r0) * v.c + j + c0];
  Shape shape = x.rank() == 1 ? Shape{c} : Shape{r, c};
  return make_result("slice", std::move(shape), std::move(out), {x},
                     [=](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       for (std::size_t i = 0; i < r; ++i)
                         for (std::size_t j = 0; j < c; ++j)
                           (*g)[(i + r0) * v.c + j + c0] +=
                               self.grad[i * c + j];
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                     shape_str(shape));
  }
  Buffer out(x.values().begin(), x.values().end());
  return make_result("reshape", std::move(shape), std::move(out), {x},
                     [](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         (*g)[i] += self.grad[i];
                     });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_result("sum", {1}, {s}, {x}, [](Node& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    for (auto& gi : *g) gi += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  const auto n = static_cast<double>(x.numel());
  return make_result("mean", {1}, {s / n}, {x}, [n](Node& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    const double share = self.grad[0] / n;
    for (auto& gi : *g) gi += share;
  });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.values()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value");
  }
  return unary(
      "log", x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

namespace {

// Calls fn(base, stride, count) for every lane along the reduced axis.
template <typename F>
void for_lanes(View2 v, int ax, F fn) {
  if (ax == 1) {
    for (std::size_t i = 0; i < v.r; ++i) fn(i * v.c, std::size_t{1}, v.c);
  } else {
    for (std::size_t j = 0; j < v.c; ++j) fn(j, v.c, v.r);
  }
}

}  // namespace

Tensor softmax(const Tensor& x, int axis) {
  const int ax = view_axis(x, axis, "softmax");
  const View2 v = view2(x);
  const auto in = x.values();
  Buffer out(in.size());
  for_lanes(v, ax, [&](std::size_t base, std::size_t stride, std::size_t n) {
    double mx = in[base];
    for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, in[base + k * stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      out[base + k * stride] = std::exp(in[base + k * stride] - mx);
      z += out[base + k * stride];
    }
    for (std::size_t k = 0; k < n; ++k) out[base + k * stride] /= z;
  });
  return make_result("softmax", x.shape(), std::move(out), {x},
                     [v, ax](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       const auto& y = self.value;
                       for_lanes(v, ax, [&](std::size_t base, std::size_t stride,
                                            std::size_t n) {
                         double dot = 0.0;
                         for (std::size_t k = 0; k < n; ++k) {
                           const auto i = base + k * stride;
                           dot += self.grad[i] * y[i];
                         }
                         for (std::size_t k = 0; k < n; ++k) {
                           const auto i = base + k * stride;
                           (*g)[i] += y[i] * (self.grad[i] - dot);
                         }
                       });
                     });
}

Tensor log_softmax(const Tensor& x, int axis) {
  const int ax = view_axis(x, axis, "log_softmax");
  const View2 v = view2(x);
  const auto in = x.values();
  Buffer out(in.size());
  for_lanes(v, ax, [&](std::size_t base, std::size_t stride, std::size_t n) {
    double mx = in[base];
    for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, in[base + k * stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) z += std::exp(in[base + k * stride] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t k = 0; k < n; ++k)
      out[base + k * stride] = in[base + k * stride] - lz;
  });
  return make_result("log_softmax", x.shape(), std::move(out), {x},
                     [v, ax](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       const auto& y = self.value;
                       for_lanes(v, ax, [&](std::size_t base, std::size_t stride,
                                            std::size_t n) {
                         double total = 0.0;
                         for (std::size_t k = 0; k < n; ++k)
                           total += self.grad[base + k * stride];
                         for (std::size_t k = 0; k < n; ++k) {
                           const auto i = base + k * stride;
                           (*g)[i] += self.grad[i] - std::exp(y[i]) * total;
                         }
                       });
                     });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return unary(
      "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor sqdist(const Tensor& x, const Tensor& y) {
  const View2 vx = view2(x);
  const View2 vy = view2(y);
  if (vx.c != vy.c) mismatch("sqdist", x, y);
  const std::size_t n = vx.r, m = vy.r, d = vx.c;
  const auto xv = x.values();
  const auto yv = y.values();
  Buffer out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = xv[i * d + k] - yv[j * d + k];
        s += diff * diff;
      }
      out[i * m + j] = s;
    }
  return make_result("sqdist", {n, m}, std::move(out), {x, y},
                     [n, m, d](Node& self) {
                       const auto& xv = self.inputs[0]->value;
                       const auto& yv = self.inputs[1]->value;
                       auto* gx = grad_of(self, 0);
                       auto* gy = grad_of(self, 1);
                       for (std::size_t i = 0; i < n; ++i)
                         for (std::size_t j = 0; j < m; ++j) {
                           const double g = 2.0 * self.grad[i * m + j];
                           if (g == 0.0) continue;
                           for (std::size_t k = 0; k < d; ++k) {
                             const double diff = xv[i * d + k] - yv[j * d + k];
                             if (gx) (*gx)[i * d + k] += g * diff;
                             if (gy) (*gy)[j * d + k] -= g * diff;
                           }
                         }
                     });
}

Tensor repeat_rows(const Tensor& x, std::size_t k) {
  if (k == 0) throw ShapeError("repeat_rows: k must be positive");
  const View2 v = view2(x);
  const auto in = x.values();
  Buffer out(v.r * k * v.c);
  for (std::size_t i = 0; i < v.r; ++i)
    for (std::size_t t = 0; t < k; ++t)
      std::copy_n(in.begin() + i * v.c, v.c, out.begin() + (i * k + t) * v.c);
  return make_result("repeat_rows", {v.r * k, v.c}, std::move(out), {x},
                     [v, k](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       for (std::size_t i = 0; i < v.r; ++i)
                         for (std::size_t t = 0; t < k; ++t)
                           for (std::size_t j = 0; j < v.c; ++j)
                             (*g)[i * v.c + j] +=
                                 self.grad[(i * k + t) * v.c + j];
                     });
}

Tensor segment_sum(const Tensor& x, std::size_t k) {
  const View2 v = view2(x);
  if (k == 0 || v.r % k != 0) {
    throw ShapeError("segment_sum: " + std::to_string(v.r) +
                     " rows not divisible into groups of " + std::to_string(k));
  }
  const std::size_t groups = v.r / k;
  const auto in = x.values();
  Buffer out(groups * v.c, 0.0);
  for (std::size_t b = 0; b < groups; ++b)
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t j = 0; j < v.c; ++j)
        out[b * v.c + j] += in[(b * k + t) * v.c + j];
  return make_result("segment_sum", {groups, v.c}, std::move(out), {x},
                     [v, k, groups](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       for (std::size_t b = 0; b < groups; ++b)
                         for (std::size_t t = 0; t < k; ++t)
                           for (std::size_t j = 0; j < v.c; ++j)
                             (*g)[(b * k + t) * v.c + j] +=
                                 self.grad[b * v.c + j];
                     });
}

Tensor segment_mean(const Tensor& x, std::size_t k) {
  return scale(segment_sum(x, k), 1.0 / static_cast<double>(k));
}

Tensor gather_rows(const Tensor& table, std::span<const std::uint32_t> idx,
                   long frozen_row) {
  const View2 v = view2(table);
  if (idx.empty()) throw ShapeError("gather_rows: empty index list");
  const auto in = table.values();
  Buffer out(idx.size() * v.c);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= v.r) {
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) +
                       " out of range for " + shape_str(table.shape()));
    }
    std::copy_n(in.begin() + idx[i] * v.c, v.c, out.begin() + i * v.c);
  }
  std::vector<std::uint32_t> rows(idx.begin(), idx.end());
  return make_result(
      "gather_rows", {idx.size(), v.c}, std::move(out), {table},
      [rows = std::move(rows), c = v.c, frozen_row](Node& self) {
        auto* g = grad_of(self, 0);
        if (!g) return;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (static_cast<long>(rows[i]) == frozen_row) continue;
          for (std::size_t j = 0; j < c; ++j)
            (*g)[rows[i] * c + j] += self.grad[i * c + j];
        }
      });
}

Tensor pick(const Tensor& x, std::span<const std::uint32_t> labels) {
  const View2 v = view2(x);
  if (labels.size() != v.r) {
    throw ShapeError("pick: " + std::to_string(labels.size()) +
                     " labels for " + shape_str(x.shape()));
  }
  const auto in = x.values();
  Buffer out(v.r);
  for (std::size_t i = 0; i < v.r; ++i) {
    if (labels[i] >= v.c) {
      throw std::out_of_range("pick: label " + std::to_string(labels[i]) +
                              " out of range for " + std::to_string(v.c) +
                              " classes");
    }
    out[i] = in[i * v.c + labels[i]];
  }
  std::vector<std::uint32_t> lab(labels.begin(), labels.end());
  return make_result("pick", {v.r}, std::move(out), {x},
                     [lab = std::move(lab), c = v.c](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       for (std::size_t i = 0; i < lab.size(); ++i)
                         (*g)[i * c + lab[i]] += self.grad[i];
                     });
}

Tensor where_rows(std::span<const std::uint8_t> take_a, const Tensor& a,
                  const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("where_rows", a, b);
  const View2 v = view2(a);
  if (take_a.size() != v.r) {
    throw ShapeError("where_rows: mask of length " +
                     std::to_string(take_a.size()) + " for " +
                     shape_str(a.shape()));
  }
  std::vector<std::uint8_t> mask(take_a.begin(), take_a.end());
  Buffer out(a.numel());
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < v.r; ++i) {
    const auto& src = mask[i] ? av : bv;
    std::copy_n(src.begin() + i * v.c, v.c, out.begin() + i * v.c);
  }
  return make_result("where_rows", a.shape(), std::move(out), {a, b},
                     [mask = std::move(mask), c = v.c](Node& self) {
                       auto* ga = grad_of(self, 0);
                       auto* gb = grad_of(self, 1);
                       for (std::size_t i = 0; i < mask.size(); ++i) {
                         auto* g = mask[i] ? ga : gb;
                         if (!g) continue;
                         for (std::size_t j = 0; j < c; ++j)
                           (*g)[i * c + j] += self.grad[i * c + j];
                       }
                     });
}

Tensor grl(const Tensor& x, double coefficient) {
  if (!(coefficient >= 0.0)) {
    throw std::invalid_argument("grl: coefficient must be nonnegative, got " +
                                std::to_string(coefficient));
  }
  Buffer out(x.values().begin(), x.values().end());
  return make_result("grl", x.shape(), std::move(out), {x},
                     [coefficient](Node& self) {
                       auto* g = grad_of(self, 0);
                       if (!g) return;
                       for (std::size_t i = 0; i < self.grad.size(); ++i)
                         (*g)[i] += -coefficient * self.grad[i];
                     });
}

}  // namespace madapt
