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

// Discretized feature fields f: Z^2 -> R^c with a fiber representation, the
// field transform T_g, cropping, padding and the lifting operator.

#ifndef EQTP_FEATURE_FIELD_HPP_
#define EQTP_FEATURE_FIELD_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "eqtp/group.hpp"

namespace eqtp {

enum class Interp { kNearest, kBilinear };

// A linear resampling of an H x W grid: each output pixel is a weighted sum of
// at most four source pixels; sources outside the grid read the pad value 0.
class ResampleOperator {
 public:
  static constexpr int kTaps = 4;

  ResampleOperator(int out_h, int out_w, int in_h, int in_w)
      : out_h_(out_h), out_w_(out_w), in_h_(in_h), in_w_(in_w),
        src_(static_cast<size_t>(out_h) * out_w * kTaps, -1),
        weight_(static_cast<size_t>(out_h) * out_w * kTaps, 0.0) {}

  // Rotation by g about (origin_row, origin_col): out(p) = in(R(g)^-1 p) with
  // x = col - origin_col and y = origin_row - row (counterclockwise positive).
  static ResampleOperator Rotation(int h, int w, double origin_row, double origin_col,
                                   const GroupElement& g, Interp interp) {
    ResampleOperator op(h, w, h, w);
    double c = 1, s = 0;
    g.CosSin(1, &c, &s);
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < w; ++col) {
        const double x = col - origin_col;
        const double y = origin_row - r;
        // R(-theta) (x, y)
        const double xs = c * x + s * y;
        const double ys = -s * x + c * y;
        op.SetSample(r * w + col, origin_row - ys, origin_col + xs, interp);
      }
    }
    return op;
  }

  int out_h() const { return out_h_; }
  int out_w() const { return out_w_; }
  int in_h() const { return in_h_; }
  int in_w() const { return in_w_; }
  int out_size() const { return out_h_ * out_w_; }
  int in_size() const { return in_h_ * in_w_; }

  std::span<const int> sources(int p) const {
    return {src_.data() + static_cast<size_t>(p) * kTaps, kTaps};
  }
  std::span<const double> weights(int p) const {
    return {weight_.data() + static_cast<size_t>(p) * kTaps, kTaps};
  }

  // out[p] = sum_k w_k in[src_k] for one channel plane.
  template <typename T>
  void Apply(std::span<const T> in, std::span<T> out) const {
    for (int p = 0; p < out_size(); ++p) {
      const int* s = src_.data() + static_cast<size_t>(p) * kTaps;
      const double* wt = weight_.data() + static_cast<size_t>(p) * kTaps;
      T acc = 0;
      for (int k = 0; k < kTaps; ++k) {
        if (s[k] >= 0) acc += static_cast<T>(wt[k]) * in[s[k]];
      }
      out[p] = acc;
    }
  }

  // in_grad[src_k] += w_k out_grad[p]; the adjoint of Apply.
  template <typename T>
  void ApplyTranspose(std::span<const T> out_grad, std::span<T> in_grad) const {
    for (int p = 0; p < out_size(); ++p) {
      const int* s = src_.data() + static_cast<size_t>(p) * kTaps;
      const double* wt = weight_.data() + static_cast<size_t>(p) * kTaps;
      for (int k = 0; k < kTaps; ++k) {
        if (s[k] >= 0) in_grad[s[k]] += static_cast<T>(wt[k]) * out_grad[p];
      }
    }
  }

 private:
  void SetSample(int p, double row, double col, Interp interp) {
    int* s = src_.data() + static_cast<size_t>(p) * kTaps;
    double* wt = weight_.data() + static_cast<size_t>(p) * kTaps;
    if (interp == Interp::kNearest) {
      const int r = static_cast<int>(std::floor(row + 0.5));
      const int c = static_cast<int>(std::floor(col + 0.5));
      if (r >= 0 && r < in_h_ && c >= 0 && c < in_w_) {
        s[0] = r * in_w_ + c;
        wt[0] = 1.0;
      }
      return;
    }
    const double r0f = std::floor(row);
    const double c0f = std::floor(col);
    const double fr = row - r0f;
    const double fc = col - c0f;
    const int r0 = static_cast<int>(r0f);
    const int c0 = static_cast<int>(c0f);
    const int rr[4] = {r0, r0, r0 + 1, r0 + 1};
    const int cc[4] = {c0, c0 + 1, c0, c0 + 1};
    const double ww[4] = {(1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc};
    int k = 0;
    for (int t = 0; t < 4; ++t) {
      if (ww[t] == 0.0) continue;
      if (rr[t] < 0 || rr[t] >= in_h_ || cc[t] < 0 || cc[t] >= in_w_) continue;
      s[k] = rr[t] * in_w_ + cc[t];
      wt[k] = ww[t];
      ++k;
    }
  }

  int out_h_, out_w_, in_h_, in_w_;
  std::vector<int> src_;
  std::vector<double> weight_;
};

// Process-wide cache of rotation operators; safe to use from several threads.
inline std::shared_ptr<const ResampleOperator> CachedRotation(int h, int w, double origin_row,
                                                              double origin_col,
                                                              const GroupElement& g,
                                                              Interp interp) {
  using Key = std::tuple<int, int, double, double, int, int, double, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const ResampleOperator>> cache;
  const Key key{h, w, origin_row, origin_col, g.order(), g.index(),
                g.is_continuous() ? g.angle() : 0.0, static_cast<int>(interp)};
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto op = std::make_shared<const ResampleOperator>(
      ResampleOperator::Rotation(h, w, origin_row, origin_col, g, interp));
  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, op);
  return op;
}

// Crop window placement shared by fields and tensors: the top-left source
// pixel of an (h x w) patch centered on (row, col).
inline int CropStart(int center, int size) { return center - (size - 1) / 2; }

struct CropSpec {
  int center_row = 0;
  int center_col = 0;
  int height = 1;
  int width = 1;
  double pad_value = 0.0;
};

// Channel layout is copy-major: channel = copy * fiber_rep.dim() + fiber index.
class FeatureField {
 public:
  FeatureField() = default;

  FeatureField(Representation fiber_rep, int copies, int height, int width,
               double pixel_pitch = 1.0)
      : fiber_rep_(fiber_rep), copies_(copies), height_(height), width_(width),
        pixel_pitch_(pixel_pitch), origin_row_((height - 1) / 2.0),
        origin_col_((width - 1) / 2.0) {
    if (copies <= 0 || height <= 0 || width <= 0) {
      throw std::invalid_argument("feature field dimensions must be positive");
    }
    data_.assign(static_cast<size_t>(channels()) * height * width, 0.0);
  }

  // A field of `channels` scalar (trivial) channels.
  static FeatureField Scalar(int channels, int height, int width, double pixel_pitch = 1.0) {
    return FeatureField(Representation::Trivial(1), channels, height, width, pixel_pitch);
  }

  const Representation& fiber_rep() const { return fiber_rep_; }
  int copies() const { return copies_; }
  int channels() const { return fiber_rep_.dim() * copies_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int plane_size() const { return height_ * width_; }
  double pixel_pitch() const { return pixel_pitch_; }
  double origin_row() const { return origin_row_; }
  double origin_col() const { return origin_col_; }
  void set_origin(double row, double col) {
    origin_row_ = row;
    origin_col_ = col;
  }
  void set_pixel_pitch(double p) { pixel_pitch_ = p; }

  // Reinterprets the channels under a different fiber type of equal total size.
  void set_fiber(Representation rep, int copies) {
    if (rep.dim() * copies != channels()) {
      throw std::invalid_argument("set_fiber: " + rep.ToString() + " x " +
                                  std::to_string(copies) + " does not match " +
                                  std::to_string(channels()) + " channels");
    }
    fiber_rep_ = rep;
    copies_ = copies;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& at(int c, int r, int col) {
    return data_[(static_cast<size_t>(c) * height_ + r) * width_ + col];
  }
  double at(int c, int r, int col) const {
    return data_[(static_cast<size_t>(c) * height_ + r) * width_ + col];
  }

  std::span<double> plane(int c) {
    return {data_.data() + static_cast<size_t>(c) * plane_size(), static_cast<size_t>(plane_size())};
  }
  std::span<const double> plane(int c) const {
    return {data_.data() + static_cast<size_t>(c) * plane_size(), static_cast<size_t>(plane_size())};
  }

  bool AllFinite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  void CheckFinite(const std::string& what) const {
    if (!AllFinite()) throw std::invalid_argument(what + ": feature field has non-finite entries");
  }

  bool SameShape(const FeatureField& o) const {
    return channels() == o.channels() && height_ == o.height_ && width_ == o.width_;
  }

 private:
  Representation fiber_rep_ = Representation::Trivial(1);
  int copies_ = 1;
  int height_ = 1;
  int width_ = 1;
  double pixel_pitch_ = 1.0;
  double origin_row_ = 0.0;
  double origin_col_ = 0.0;
  std::vector<double> data_ = std::vector<double>(1, 0.0);
};

inline double MaxAbsDiff(const FeatureField& a, const FeatureField& b) {
  if (!a.SameShape(b)) throw std::invalid_argument("MaxAbsDiff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// ||a - b||_2 / ||b||_2.
inline double RelativeL2(const FeatureField& a, const FeatureField& b) {
  if (!a.SameShape(b)) throw std::invalid_argument("RelativeL2: shape mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    num += d * d;
    den += b.data()[i] * b.data()[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

// Base-space rotation only (T^0 applied to every channel).
inline FeatureField RotateBase(const FeatureField& f, const GroupElement& g, Interp interp) {
  if (g.is_identity()) return f;
  auto op = CachedRotation(f.height(), f.width(), f.origin_row(), f.origin_col(), g, interp);
  FeatureField out = f;
  for (int c = 0; c < f.channels(); ++c) op->Apply<double>(f.plane(c), out.plane(c));
  return out;
}

// Fiber-only action rho(g) on every copy.
inline FeatureField ActOnFiber(const FeatureField& f, const GroupElement& g) {
  const Matrix m = RepMatrix(f.fiber_rep(), g);
  const int d = f.fiber_rep().dim();
  FeatureField out = f;
  const int n = f.plane_size();
  for (int copy = 0; copy < f.copies(); ++copy) {
    for (int i = 0; i < d; ++i) {
      auto dst = out.plane(copy * d + i);
      std::fill(dst.begin(), dst.end(), 0.0);
      for (int j = 0; j < d; ++j) {
        const double a = m(i, j);
        if (a == 0.0) continue;
        auto src = f.plane(copy * d + j);
        for (int p = 0; p < n; ++p) dst[p] += a * src[p];
      }
    }
  }
  return out;
}

// [T_g f](x) = rho(g) f(R(g)^-1 x) about the field's origin.
inline FeatureField Transform(const FeatureField& f, const GroupElement& g,
                              Interp interp = Interp::kBilinear) {
  return ActOnFiber(RotateBase(f, g, interp), g);
}

// Stack of n rotated copies T_{2 pi i / n}(c). Input channel k becomes one
// regular copy whose fiber index i holds the rotation by 2 pi i / n.
inline FeatureField Lift(const FeatureField& c, int n, Interp interp = Interp::kBilinear) {
  if (n <= 0) throw std::invalid_argument("lift: group order must be positive");
  if (c.fiber_rep().kind() != RepKind::kTrivial) {
    throw std::invalid_argument("lift: input must have a trivial fiber, got " +
                                c.fiber_rep().ToString());
  }
  FeatureField out(Representation::Regular(n), c.channels(), c.height(), c.width(),
                   c.pixel_pitch());
  out.set_origin(c.origin_row(), c.origin_col());
  for (int i = 0; i < n; ++i) {
    const GroupElement g = GroupElement::Cyclic(n, i);
    auto op = CachedRotation(c.height(), c.width(), c.origin_row(), c.origin_col(), g, interp);
    for (int k = 0; k < c.channels(); ++k) op->Apply<double>(c.plane(k), out.plane(k * n + i));
  }
  return out;
}

inline FeatureField Crop(const FeatureField& f, const CropSpec& spec) {
  if (spec.height <= 0 || spec.width <= 0) throw std::invalid_argument("crop size must be positive");
  FeatureField out(f.fiber_rep(), f.copies(), spec.height, spec.width, f.pixel_pitch());
  const int r0 = CropStart(spec.center_row, spec.height);
  const int c0 = CropStart(spec.center_col, spec.width);
  for (int c = 0; c < f.channels(); ++c) {
    for (int r = 0; r < spec.height; ++r) {
      for (int col = 0; col < spec.width; ++col) {
        const int sr = r0 + r, sc = c0 + col;
        const bool inside = sr >= 0 && sr < f.height() && sc >= 0 && sc < f.width();
        out.at(c, r, col) = inside ? f.at(c, sr, sc) : spec.pad_value;
      }
    }
  }
  return out;
}

// Symmetric border of `border` pixels on every side.
inline FeatureField Pad(const FeatureField& f, int border, double value = 0.0) {
  if (border < 0) throw std::invalid_argument("pad border must be non-negative");
  if (border == 0) return f;
  FeatureField out(f.fiber_rep(), f.copies(), f.height() + 2 * border, f.width() + 2 * border,
                   f.pixel_pitch());
  std::fill(out.data().begin(), out.data().end(), value);
  out.set_origin(f.origin_row() + border, f.origin_col() + border);
  for (int c = 0; c < f.channels(); ++c) {
    for (int r = 0; r < f.height(); ++r) {
      for (int col = 0; col < f.width(); ++col) out.at(c, r + border, col + border) = f.at(c, r, col);
    }
  }
  return out;
}

// Concatenates channels of same-sized fields (trivial fibers), e.g. o_t || o_g.
inline FeatureField StackChannels(const FeatureField& a, const FeatureField& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw std::invalid_argument("StackChannels: spatial shapes differ");
  }
  FeatureField out = FeatureField::Scalar(a.channels() + b.channels(), a.height(), a.width(),
                                          a.pixel_pitch());
  out.set_origin(a.origin_row(), a.origin_col());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.data().size());
  return out;
}

// Separable Gaussian blur with zero padding; used to band-limit test inputs.
inline FeatureField GaussianSmooth(const FeatureField& f, double sigma) {
  if (sigma <= 0) return f;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& v : k) v /= total;
  FeatureField tmp = f, out = f;
  const int h = f.height(), w = f.width();
  for (int c = 0; c < f.channels(); ++c) {
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < w; ++col) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const int cc = col + i;
          if (cc >= 0 && cc < w) acc += k[i + radius] * f.at(c, r, cc);
        }
        tmp.at(c, r, col) = acc;
      }
    }
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < w; ++col) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          const int rr = r + i;
          if (rr >= 0 && rr < h) acc += k[i + radius] * tmp.at(c, rr, col);
        }
        out.at(c, r, col) = acc;
      }
    }
  }
  return out;
}

}  // namespace eqtp

#endif  // EQTP_FEATURE_FIELD_HPP_
