// Copyright 2026 The eqtp Authors
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

// Reverse-mode differentiation over dense tensors. A Tensor is a handle to a
// graph node; ops record a backward closure and Backward() replays them in
// reverse topological order.

#ifndef EQTP_AUTODIFF_HPP_
#define EQTP_AUTODIFF_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "eqtp/correlate.hpp"
#include "eqtp/feature_field.hpp"
#include "eqtp/steerable.hpp"

namespace eqtp {
namespace ad {

using Shape = std::vector<int>;

inline size_t NumElements(const Shape& s) {
  size_t n = 1;
  for (int d : s) n *= static_cast<size_t>(d);
  return n;
}

inline std::string ShapeString(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

template <typename T>
struct Node {
  std::string op;
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::span<T> Grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> n) : n_(std::move(n)) {}

  static Tensor Make(const std::string& op, Shape shape, bool requires_grad) {
    auto n = std::make_shared<Node<T>>();
    n->op = op;
    n->value.assign(NumElements(shape), T(0));
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    return Tensor(n);
  }

  static Tensor Constant(Shape shape, std::vector<T> values) {
    if (values.size() != NumElements(shape)) {
      throw std::invalid_argument("constant: " + std::to_string(values.size()) +
                                  " values for shape " + ShapeString(shape));
    }
    Tensor t = Make("constant", std::move(shape), false);
    t.n_->value = std::move(values);
    return t;
  }

  static Tensor Param(Shape shape, std::vector<T> values) {
    Tensor t = Constant(std::move(shape), std::move(values));
    t.n_->op = "param";
    t.n_->requires_grad = true;
    return t;
  }

  static Tensor FromField(const FeatureField& f) {
    std::vector<T> v(f.data().begin(), f.data().end());
    return Constant({f.channels(), f.height(), f.width()}, std::move(v));
  }

  bool defined() const { return n_ != nullptr; }
  Node<T>& node() const { return *n_; }
  const std::shared_ptr<Node<T>>& ptr() const { return n_; }
  const Shape& shape() const { return n_->shape; }
  int dim(int i) const { return n_->shape.at(i); }
  size_t size() const { return n_->value.size(); }
  std::vector<T>& data() { return n_->value; }
  const std::vector<T>& data() const { return n_->value; }
  std::span<const T> grad() const {
    static const std::vector<T> kEmpty;
    return n_->grad.empty() ? std::span<const T>(kEmpty) : std::span<const T>(n_->grad);
  }
  bool requires_grad() const { return n_->requires_grad; }
  void ZeroGrad() { n_->grad.clear(); }

  T item() const {
    if (size() != 1) throw std::invalid_argument("item() on tensor of shape " + ShapeString(shape()));
    return n_->value[0];
  }

  FeatureField ToField() const {
    if (shape().size() != 3) throw std::invalid_argument("ToField needs a [C,H,W] tensor");
    FeatureField f = FeatureField::Scalar(dim(0), dim(1), dim(2));
    std::copy(data().begin(), data().end(), f.data().begin());
    return f;
  }

 private:
  std::shared_ptr<Node<T>> n_;
};

namespace internal {

template <typename T>
Tensor<T> Result(const std::string& op, Shape shape, std::initializer_list<Tensor<T>> parents) {
  bool rg = false;
  for (const auto& p : parents) rg = rg || p.requires_grad();
  Tensor<T> out = Tensor<T>::Make(op, std::move(shape), rg);
  if (rg) {
    for (const auto& p : parents) out.node().parents.push_back(p.ptr());
  }
  return out;
}

inline void Require(bool ok, const std::string& op, const std::string& msg) {
  if (!ok) throw std::invalid_argument(op + ": " + msg);
}

template <typename T>
void CheckRank3(const Tensor<T>& x, const std::string& op) {
  Require(x.shape().size() == 3, op, "expected [C,H,W], got " + ShapeString(x.shape()));
}

}  // namespace internal

// Fills gradients of every node reachable from the scalar `loss`.
template <typename T>
void Backward(const Tensor<T>& loss) {
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                ShapeString(loss.shape()));
  }
  if (!loss.requires_grad()) return;
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  // Iterative post-order DFS.
  std::vector<std::pair<Node<T>*, size_t>> stack = {{loss.ptr().get(), 0}};
  seen.insert(loss.ptr().get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  loss.ptr()->Grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  internal::Require(a.shape() == b.shape(), "add",
                    "shapes " + ShapeString(a.shape()) + " and " + ShapeString(b.shape()));
  Tensor<T> out = internal::Result<T>("add", a.shape(), {a, b});
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  if (out.requires_grad()) {
    out.node().backward = [](Node<T>& self) {
      for (auto& p : self.parents) {
        if (!p->requires_grad) continue;
        auto g = p->Grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  internal::Require(a.shape() == b.shape(), "mul",
                    "shapes " + ShapeString(a.shape()) + " and " + ShapeString(b.shape()));
  Tensor<T> out = internal::Result<T>("mul", a.shape(), {a, b});
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  if (out.requires_grad()) {
    auto pa = a.ptr(), pb = b.ptr();
    out.node().backward = [pa, pb](Node<T>& self) {
      if (pa->requires_grad) {
        auto g = pa->Grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i];
      }
      if (pb->requires_grad) {
        auto g = pb->Grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->value[i];
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& a, T s) {
  Tensor<T> out = internal::Result<T>("scale", a.shape(), {a});
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = s * a.data()[i];
  if (out.requires_grad()) {
    out.node().backward = [s](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& a) {
  Tensor<T> out = internal::Result<T>("sum", {1}, {a});
  T acc = 0;
  for (T v : a.data()) acc += v;
  out.data()[0] = acc;
  if (out.requires_grad()) {
    out.node().backward = [](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      for (auto& v : g) v += self.grad[0];
    };
  }
  return out;
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, Shape shape) {
  internal::Require(NumElements(shape) == a.size(), "reshape",
                    ShapeString(a.shape()) + " -> " + ShapeString(shape));
  Tensor<T> out = internal::Result<T>("reshape", std::move(shape), {a});
  out.data() = a.data();
  if (out.requires_grad()) {
    out.node().backward = [](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> Relu(const Tensor<T>& a) {
  Tensor<T> out = internal::Result<T>("relu", a.shape(), {a});
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] > T(0) ? a.data()[i] : T(0);
  if (out.requires_grad()) {
    out.node().backward = [](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      const auto& x = self.parents[0]->value;
      for (size_t i = 0; i < g.size(); ++i) {
        if (x[i] > T(0)) g[i] += self.grad[i];
      }
    };
  }
  return out;
}

// out = M x for a fixed sparse M (e.g. a steerable projector).
template <typename T>
Tensor<T> LinearMap(const Tensor<T>& x, std::shared_ptr<const SparseLinearMap> m, Shape shape) {
  internal::Require(static_cast<size_t>(m->cols()) == x.size(), "linear_map",
                    "map has " + std::to_string(m->cols()) + " columns, input " +
                        ShapeString(x.shape()));
  internal::Require(static_cast<size_t>(m->rows()) == NumElements(shape), "linear_map",
                    "output shape " + ShapeString(shape));
  Tensor<T> out = internal::Result<T>("linear_map", std::move(shape), {x});
  m->Apply<T>(std::span<const T>(x.data()), std::span<T>(out.data()));
  if (out.requires_grad()) {
    out.node().backward = [m](Node<T>& self) {
      m->ApplyTranspose<T>(std::span<const T>(self.grad), self.parents[0]->Grad());
    };
  }
  return out;
}

// Cross-correlation of x [Cin,H,W] with w [Cout,Cin,k,k]; both may carry
// gradients (the place model correlates two network outputs).
template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& w, PadMode mode = PadMode::kSame) {
  internal::CheckRank3(x, "conv2d");
  internal::Require(w.shape().size() == 4 && w.dim(1) == x.dim(0) && w.dim(2) == w.dim(3), "conv2d",
                    "kernel " + ShapeString(w.shape()) + " vs input " + ShapeString(x.shape()));
  CorrelationShape s{x.dim(0), w.dim(0), x.dim(1), x.dim(2), w.dim(2), mode};
  s.Validate("conv2d");
  Tensor<T> out = internal::Result<T>("conv2d", {s.out_channels, s.out_height(), s.out_width()},
                                      {x, w});
  CorrelateForward<T>(s, x.data(), w.data(), out.data());
  if (out.requires_grad()) {
    auto px = x.ptr(), pw = w.ptr();
    out.node().backward = [s, px, pw](Node<T>& self) {
      if (px->requires_grad) CorrelateBackwardInput<T>(s, self.grad, pw->value, px->Grad());
      if (pw->requires_grad) CorrelateBackwardWeight<T>(s, self.grad, px->value, pw->Grad());
    };
  }
  return out;
}

// x [C,H,W] + b[c] on every pixel.
template <typename T>
Tensor<T> AddBias(const Tensor<T>& x, const Tensor<T>& b) {
  internal::CheckRank3(x, "add_bias");
  internal::Require(b.size() == static_cast<size_t>(x.dim(0)), "add_bias",
                    "bias " + ShapeString(b.shape()) + " vs input " + ShapeString(x.shape()));
  Tensor<T> out = internal::Result<T>("add_bias", x.shape(), {x, b});
  const size_t plane = static_cast<size_t>(x.dim(1)) * x.dim(2);
  for (int c = 0; c < x.dim(0); ++c) {
    for (size_t p = 0; p < plane; ++p) out.data()[c * plane + p] = x.data()[c * plane + p] + b.data()[c];
  }
  if (out.requires_grad()) {
    auto px = x.ptr(), pb = b.ptr();
    out.node().backward = [px, pb, plane](Node<T>& self) {
      if (px->requires_grad) {
        auto g = px->Grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
      if (pb->requires_grad) {
        auto g = pb->Grad();
        for (size_t c = 0; c < g.size(); ++c) {
          T acc = 0;
          for (size_t p = 0; p < plane; ++p) acc += self.grad[c * plane + p];
          g[c] += acc;
        }
      }
    };
  }
  return out;
}

// 2x2 max pooling (floor on odd sizes); ties go to the lowest flat index.
template <typename T>
Tensor<T> MaxPool2(const Tensor<T>& x) {
  internal::CheckRank3(x, "maxpool2");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2), oh = h / 2, ow = w / 2;
  internal::Require(oh > 0 && ow > 0, "maxpool2", "input too small " + ShapeString(x.shape()));
  Tensor<T> out = internal::Result<T>("maxpool2", {c, oh, ow}, {x});
  auto argmax = std::make_shared<std::vector<int>>(out.size());
  for (int ch = 0; ch < c; ++ch) {
    for (int r = 0; r < oh; ++r) {
      for (int col = 0; col < ow; ++col) {
        int best = (ch * h + 2 * r) * w + 2 * col;
        for (int dr = 0; dr < 2; ++dr) {
          for (int dc = 0; dc < 2; ++dc) {
            const int idx = (ch * h + 2 * r + dr) * w + 2 * col + dc;
            if (x.data()[idx] > x.data()[best]) best = idx;
          }
        }
        const int o = (ch * oh + r) * ow + col;
        (*argmax)[o] = best;
        out.data()[o] = x.data()[best];
      }
    }
  }
  if (out.requires_grad()) {
    out.node().backward = [argmax](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      for (size_t o = 0; o < argmax->size(); ++o) g[(*argmax)[o]] += self.grad[o];
    };
  }
  return out;
}

namespace internal {

// Source taps for 2x linear upsampling with half-pixel centers along one axis.
struct UpTap {
  int i0, i1;
  double w0, w1;
};

inline std::vector<UpTap> UpsampleTaps(int in) {
  std::vector<UpTap> taps(2 * in);
  for (int o = 0; o < 2 * in; ++o) {
    const double src = std::max(0.0, (o + 0.5) / 2.0 - 0.5);
    const int i0 = std::min(static_cast<int>(std::floor(src)), in - 1);
    const int i1 = std::min(i0 + 1, in - 1);
    const double f = src - i0;
    taps[o] = {i0, i1, 1.0 - f, f};
  }
  return taps;
}

}  // namespace internal

// Bilinear 2x upsampling, half-pixel aligned (symmetric about the center).
template <typename T>
Tensor<T> UpsampleBilinear2(const Tensor<T>& x) {
  internal::CheckRank3(x, "bilinear_upsample2");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2), oh = 2 * h, ow = 2 * w;
  Tensor<T> out = internal::Result<T>("bilinear_upsample2", {c, oh, ow}, {x});
  const auto ty = internal::UpsampleTaps(h), tx = internal::UpsampleTaps(w);
  for (int ch = 0; ch < c; ++ch) {
    const T* src = x.data().data() + static_cast<size_t>(ch) * h * w;
    T* dst = out.data().data() + static_cast<size_t>(ch) * oh * ow;
    for (int r = 0; r < oh; ++r) {
      const auto& a = ty[r];
      for (int col = 0; col < ow; ++col) {
        const auto& b = tx[col];
        dst[r * ow + col] = static_cast<T>(
            a.w0 * (b.w0 * src[a.i0 * w + b.i0] + b.w1 * src[a.i0 * w + b.i1]) +
            a.w1 * (b.w0 * src[a.i1 * w + b.i0] + b.w1 * src[a.i1 * w + b.i1]));
      }
    }
  }
  if (out.requires_grad()) {
    out.node().backward = [ty, tx, c, h, w](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      const int oh = 2 * h, ow = 2 * w;
      for (int ch = 0; ch < c; ++ch) {
        T* gs = g.data() + static_cast<size_t>(ch) * h * w;
        const T* gd = self.grad.data() + static_cast<size_t>(ch) * oh * ow;
        for (int r = 0; r < oh; ++r) {
          const auto& a = ty[r];
          for (int col = 0; col < ow; ++col) {
            const auto& b = tx[col];
            const double v = gd[r * ow + col];
            gs[a.i0 * w + b.i0] += static_cast<T>(a.w0 * b.w0 * v);
            gs[a.i0 * w + b.i1] += static_cast<T>(a.w0 * b.w1 * v);
            gs[a.i1 * w + b.i0] += static_cast<T>(a.w1 * b.w0 * v);
            gs[a.i1 * w + b.i1] += static_cast<T>(a.w1 * b.w1 * v);
          }
        }
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> ConcatChannels(const Tensor<T>& a, const Tensor<T>& b) {
  internal::CheckRank3(a, "concat_channels");
  internal::CheckRank3(b, "concat_channels");
  internal::Require(a.dim(1) == b.dim(1) && a.dim(2) == b.dim(2), "concat_channels",
                    ShapeString(a.shape()) + " vs " + ShapeString(b.shape()));
  Tensor<T> out = internal::Result<T>("concat_channels", {a.dim(0) + b.dim(0), a.dim(1), a.dim(2)},
                                      {a, b});
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.size());
  if (out.requires_grad()) {
    auto pa = a.ptr(), pb = b.ptr();
    out.node().backward = [pa, pb](Node<T>& self) {
      if (pa->requires_grad) {
        auto g = pa->Grad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
      if (pb->requires_grad) {
        auto g = pb->Grad();
        const size_t off = pa->value.size();
        for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[off + i];
      }
    };
  }
  return out;
}

// Applies the same spatial resampling to every channel of x [..., H, W].
template <typename T>
Tensor<T> Resample(const Tensor<T>& x, std::shared_ptr<const ResampleOperator> op) {
  const Shape& s = x.shape();
  internal::Require(s.size() >= 2 && s[s.size() - 2] == op->in_h() && s[s.size() - 1] == op->in_w(),
                    "resample", "input " + ShapeString(s));
  Shape os = s;
  os[s.size() - 2] = op->out_h();
  os[s.size() - 1] = op->out_w();
  Tensor<T> out = internal::Result<T>("resample", os, {x});
  const size_t planes = x.size() / op->in_size();
  for (size_t p = 0; p < planes; ++p) {
    op->Apply<T>(std::span<const T>(x.data()).subspan(p * op->in_size(), op->in_size()),
                 std::span<T>(out.data()).subspan(p * op->out_size(), op->out_size()));
  }
  if (out.requires_grad()) {
    out.node().backward = [op, planes](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      for (size_t p = 0; p < planes; ++p) {
        op->ApplyTranspose<T>(
            std::span<const T>(self.grad).subspan(p * op->out_size(), op->out_size()),
            g.subspan(p * op->in_size(), op->in_size()));
      }
    };
  }
  return out;
}

// Stack of n rotated copies of x [C,k,k] about its center, as a correlation
// kernel [n, C, k, k]: output channel i scores rotation 2 pi i / n.
template <typename T>
Tensor<T> LiftKernel(const Tensor<T>& x, int n, Interp interp = Interp::kBilinear) {
  internal::CheckRank3(x, "lift");
  internal::Require(n > 0, "lift", "group order must be positive");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor<T> out = internal::Result<T>("lift", {n, c, h, w}, {x});
  std::vector<std::shared_ptr<const ResampleOperator>> ops;
  const size_t plane = static_cast<size_t>(h) * w;
  for (int i = 0; i < n; ++i) {
    ops.push_back(CachedRotation(h, w, (h - 1) / 2.0, (w - 1) / 2.0, GroupElement::Cyclic(n, i), interp));
    for (int ch = 0; ch < c; ++ch) {
      ops.back()->Apply<T>(std::span<const T>(x.data()).subspan(ch * plane, plane),
                           std::span<T>(out.data()).subspan((static_cast<size_t>(i) * c + ch) * plane, plane));
    }
  }
  if (out.requires_grad()) {
    out.node().backward = [ops, c, plane](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      for (size_t i = 0; i < ops.size(); ++i) {
        for (int ch = 0; ch < c; ++ch) {
          ops[i]->ApplyTranspose<T>(
              std::span<const T>(self.grad).subspan((i * c + ch) * plane, plane),
              g.subspan(ch * plane, plane));
        }
      }
    };
  }
  return out;
}

// Window [r0, r0+h) x [c0, c0+w) of x [C,H,W]; outside reads zero.
template <typename T>
Tensor<T> Crop(const Tensor<T>& x, int r0, int c0, int h, int w) {
  internal::CheckRank3(x, "crop");
  internal::Require(h > 0 && w > 0, "crop", "size must be positive");
  const int c = x.dim(0), ih = x.dim(1), iw = x.dim(2);
  Tensor<T> out = internal::Result<T>("crop", {c, h, w}, {x});
  auto visit = [=](auto&& fn) {
    for (int ch = 0; ch < c; ++ch) {
      for (int r = 0; r < h; ++r) {
        const int sr = r0 + r;
        if (sr < 0 || sr >= ih) continue;
        for (int col = 0; col < w; ++col) {
          const int sc = c0 + col;
          if (sc < 0 || sc >= iw) continue;
          fn((static_cast<size_t>(ch) * h + r) * w + col, (static_cast<size_t>(ch) * ih + sr) * iw + sc);
        }
      }
    }
  };
  visit([&](size_t o, size_t i) { out.data()[o] = x.data()[i]; });
  if (out.requires_grad()) {
    out.node().backward = [visit](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      visit([&](size_t o, size_t i) { g[i] += self.grad[o]; });
    };
  }
  return out;
}

// Zero border of `border` pixels on each side.
template <typename T>
Tensor<T> Pad(const Tensor<T>& x, int border) {
  internal::CheckRank3(x, "pad");
  return Crop(x, -border, -border, x.dim(1) + 2 * border, x.dim(2) + 2 * border);
}

// Mean over pixels: [C,H,W] -> [C,1,1].
template <typename T>
Tensor<T> GlobalAvgPool(const Tensor<T>& x) {
  internal::CheckRank3(x, "global_avg_pool");
  const int c = x.dim(0);
  const size_t plane = static_cast<size_t>(x.dim(1)) * x.dim(2);
  Tensor<T> out = internal::Result<T>("global_avg_pool", {c, 1, 1}, {x});
  for (int ch = 0; ch < c; ++ch) {
    T acc = 0;
    for (size_t p = 0; p < plane; ++p) acc += x.data()[ch * plane + p];
    out.data()[ch] = acc / static_cast<T>(plane);
  }
  if (out.requires_grad()) {
    out.node().backward = [plane](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      const T inv = T(1) / static_cast<T>(plane);
      for (size_t ch = 0; ch < self.grad.size(); ++ch) {
        for (size_t p = 0; p < plane; ++p) g[ch * plane + p] += self.grad[ch] * inv;
      }
    };
  }
  return out;
}

// Zeroes everything outside the disk inscribed in each [H,W] plane (pixels
// within (min(H,W) - 1) / 2 of the center), so the support is closed under
// every rotation.
template <typename T>
Tensor<T> MaskDisk(const Tensor<T>& x) {
  internal::CheckRank3(x, "mask_disk");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const double cr = (h - 1) / 2.0, cc = (w - 1) / 2.0, radius = (std::min(h, w) - 1) / 2.0;
  std::vector<T> mask(x.size());
  for (int ch = 0; ch < c; ++ch) {
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < w; ++col) {
        const double d2 = (r - cr) * (r - cr) + (col - cc) * (col - cc);
        mask[(static_cast<size_t>(ch) * h + r) * w + col] = d2 <= radius * radius + 1e-9 ? T(1) : T(0);
      }
    }
  }
  return Mul(x, Tensor<T>::Constant(x.shape(), std::move(mask)));
}

// -log softmax(logits)[target] over all entries of `logits`.
template <typename T>
Tensor<T> SoftmaxCrossEntropy(const Tensor<T>& logits, size_t target) {
  internal::Require(target < logits.size(), "softmax_ce",
                    "target " + std::to_string(target) + " outside " + ShapeString(logits.shape()));
  Tensor<T> out = internal::Result<T>("softmax_ce", {1}, {logits});
  const auto& z = logits.data();
  const T zmax = *std::max_element(z.begin(), z.end());
  double total = 0;
  for (T v : z) total += std::exp(static_cast<double>(v - zmax));
  const double log_norm = static_cast<double>(zmax) + std::log(total);
  out.data()[0] = static_cast<T>(log_norm - static_cast<double>(z[target]));
  if (out.requires_grad()) {
    out.node().backward = [target, log_norm](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      const auto& z = self.parents[0]->value;
      const T up = self.grad[0];
      for (size_t i = 0; i < g.size(); ++i) {
        g[i] += up * static_cast<T>(std::exp(static_cast<double>(z[i]) - log_norm));
      }
      g[target] -= up;
    };
  }
  return out;
}

// Entry `index` along the leading axis: [N, ...] -> [...].
template <typename T>
Tensor<T> Slice(const Tensor<T>& x, int index) {
  internal::Require(x.shape().size() >= 2 && index >= 0 && index < x.dim(0), "slice",
                    "index " + std::to_string(index) + " of " + ShapeString(x.shape()));
  Shape s(x.shape().begin() + 1, x.shape().end());
  const size_t n = NumElements(s), off = n * index;
  Tensor<T> out = internal::Result<T>("slice", s, {x});
  std::copy(x.data().begin() + off, x.data().begin() + off + n, out.data().begin());
  if (out.requires_grad()) {
    out.node().backward = [off, n](Node<T>& self) {
      auto g = self.parents[0]->Grad();
      for (size_t i = 0; i < n; ++i) g[off + i] += self.grad[i];
    };
  }
  return out;
}

// Stacks same-shaped tensors along a new leading axis.
template <typename T>
Tensor<T> Stack(const std::vector<Tensor<T>>& xs) {
  internal::Require(!xs.empty(), "stack", "no inputs");
  Shape s = xs[0].shape();
  bool rg = false;
  for (const auto& x : xs) {
    internal::Require(x.shape() == s, "stack",
                      ShapeString(x.shape()) + " vs " + ShapeString(xs[0].shape()));
    rg = rg || x.requires_grad();
  }
  const size_t n = NumElements(s);
  s.insert(s.begin(), static_cast<int>(xs.size()));
  Tensor<T> out = Tensor<T>::Make("stack", s, rg);
  for (size_t k = 0; k < xs.size(); ++k) {
    std::copy(xs[k].data().begin(), xs[k].data().end(), out.data().begin() + k * n);
    if (rg) out.node().parents.push_back(xs[k].ptr());
  }
  if (rg) {
    out.node().backward = [n](Node<T>& self) {
      for (size_t k = 0; k < self.parents.size(); ++k) {
        if (!self.parents[k]->requires_grad) continue;
        auto g = self.parents[k]->Grad();
        for (size_t i = 0; i < n; ++i) g[i] += self.grad[k * n + i];
      }
    };
  }
  return out;
}

// Plain softmax over all entries (inference only).
template <typename T>
std::vector<double> Softmax(std::span<const T> z) {
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  const double zmax = static_cast<double>(*std::max_element(z.begin(), z.end()));
  double total = 0;
  for (size_t i = 0; i < z.size(); ++i) total += p[i] = std::exp(static_cast<double>(z[i]) - zmax);
  for (double& v : p) v /= total;
  return p;
}

}  // namespace ad
}  // namespace eqtp

#endif  // EQTP_AUTODIFF_HPP_
