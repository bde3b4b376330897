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

// The cross-correlation primitive (K * f)(v) = sum_w f(v + w) K(w) with zero
// padding, plus its two adjoints. Every output element is accumulated in a
// fixed order, so results do not depend on how callers split the work.

#ifndef EQTP_CORRELATE_HPP_
#define EQTP_CORRELATE_HPP_

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqtp/feature_field.hpp"

namespace eqtp {

enum class PadMode { kSame, kValid };

struct CorrelationShape {
  int in_channels = 1;
  int out_channels = 1;
  int height = 1;  // input
  int width = 1;
  int kernel = 1;  // odd, square
  PadMode mode = PadMode::kSame;

  int pad() const { return mode == PadMode::kSame ? (kernel - 1) / 2 : 0; }
  int out_height() const { return mode == PadMode::kSame ? height : height - kernel + 1; }
  int out_width() const { return mode == PadMode::kSame ? width : width - kernel + 1; }
  size_t in_size() const { return static_cast<size_t>(in_channels) * height * width; }
  size_t out_size() const { return static_cast<size_t>(out_channels) * out_height() * out_width(); }
  size_t weight_size() const {
    return static_cast<size_t>(out_channels) * in_channels * kernel * kernel;
  }

  void Validate(const char* op) const {
    if (kernel <= 0 || kernel % 2 == 0) {
      throw std::invalid_argument(std::string(op) + ": kernel size must be odd, got " +
                                  std::to_string(kernel));
    }
    if (out_height() <= 0 || out_width() <= 0) {
      throw std::invalid_argument(std::string(op) + ": kernel " + std::to_string(kernel) +
                                  " larger than input " + std::to_string(height) + "x" +
                                  std::to_string(width));
    }
  }
};

namespace internal {

template <typename T>
inline T Dot(const T* a, const T* b, int n) {
  T acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int k = 0;
  for (; k + 8 <= n; k += 8) {
    for (int l = 0; l < 8; ++l) acc[l] += a[k + l] * b[k + l];
  }
  T s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

// Valid output ranges [lo, hi) for a kernel tap at offset (i - pad).
inline void TapRange(int tap, int pad, int in_extent, int out_extent, int* lo, int* hi) {
  *lo = std::max(0, pad - tap);
  *hi = std::min(out_extent, in_extent + pad - tap);
}

}  // namespace internal

// out[co] += sum_ci w[co, ci] * in[ci]; `out` is accumulated into.
template <typename T>
void CorrelateForward(const CorrelationShape& s, std::span<const T> in, std::span<const T> w,
                      std::span<T> out) {
  const int k = s.kernel, p = s.pad(), h = s.height, wd = s.width;
  const int oh = s.out_height(), ow = s.out_width();
  for (int co = 0; co < s.out_channels; ++co) {
    T* dst_plane = out.data() + static_cast<size_t>(co) * oh * ow;
    for (int ci = 0; ci < s.in_channels; ++ci) {
      const T* src_plane = in.data() + static_cast<size_t>(ci) * h * wd;
      const T* wk = w.data() + (static_cast<size_t>(co) * s.in_channels + ci) * k * k;
      for (int i = 0; i < k; ++i) {
        int y_lo, y_hi;
        internal::TapRange(i, p, h, oh, &y_lo, &y_hi);
        for (int j = 0; j < k; ++j) {
          const T wv = wk[i * k + j];
          if (wv == T(0)) continue;
          int x_lo, x_hi;
          internal::TapRange(j, p, wd, ow, &x_lo, &x_hi);
          for (int y = y_lo; y < y_hi; ++y) {
            const T* src = src_plane + static_cast<size_t>(y + i - p) * wd + (j - p);
            T* dst = dst_plane + static_cast<size_t>(y) * ow;
            for (int x = x_lo; x < x_hi; ++x) dst[x] += wv * src[x];
          }
        }
      }
    }
  }
}

// in_grad += W^T out_grad.
template <typename T>
void CorrelateBackwardInput(const CorrelationShape& s, std::span<const T> out_grad,
                            std::span<const T> w, std::span<T> in_grad) {
  const int k = s.kernel, p = s.pad(), h = s.height, wd = s.width;
  const int oh = s.out_height(), ow = s.out_width();
  for (int ci = 0; ci < s.in_channels; ++ci) {
    T* gin_plane = in_grad.data() + static_cast<size_t>(ci) * h * wd;
    for (int co = 0; co < s.out_channels; ++co) {
      const T* gout_plane = out_grad.data() + static_cast<size_t>(co) * oh * ow;
      const T* wk = w.data() + (static_cast<size_t>(co) * s.in_channels + ci) * k * k;
      for (int i = 0; i < k; ++i) {
        int y_lo, y_hi;
        internal::TapRange(i, p, h, oh, &y_lo, &y_hi);
        for (int j = 0; j < k; ++j) {
          const T wv = wk[i * k + j];
          if (wv == T(0)) continue;
          int x_lo, x_hi;
          internal::TapRange(j, p, wd, ow, &x_lo, &x_hi);
          for (int y = y_lo; y < y_hi; ++y) {
            T* dst = gin_plane + static_cast<size_t>(y + i - p) * wd + (j - p);
            const T* src = gout_plane + static_cast<size_t>(y) * ow;
            for (int x = x_lo; x < x_hi; ++x) dst[x] += wv * src[x];
          }
        }
      }
    }
  }
}

// w_grad += out_grad (x) in.
template <typename T>
void CorrelateBackwardWeight(const CorrelationShape& s, std::span<const T> out_grad,
                             std::span<const T> in, std::span<T> w_grad) {
  const int k = s.kernel, p = s.pad(), h = s.height, wd = s.width;
  const int oh = s.out_height(), ow = s.out_width();
  for (int co = 0; co < s.out_channels; ++co) {
    const T* gout_plane = out_grad.data() + static_cast<size_t>(co) * oh * ow;
    for (int ci = 0; ci < s.in_channels; ++ci) {
      const T* src_plane = in.data() + static_cast<size_t>(ci) * h * wd;
      T* gw = w_grad.data() + (static_cast<size_t>(co) * s.in_channels + ci) * k * k;
      for (int i = 0; i < k; ++i) {
        int y_lo, y_hi;
        internal::TapRange(i, p, h, oh, &y_lo, &y_hi);
        for (int j = 0; j < k; ++j) {
          int x_lo, x_hi;
          internal::TapRange(j, p, wd, ow, &x_lo, &x_hi);
          if (x_hi <= x_lo) continue;
          T acc = 0;
          for (int y = y_lo; y < y_hi; ++y) {
            const T* a = gout_plane + static_cast<size_t>(y) * ow + x_lo;
            const T* b = src_plane + static_cast<size_t>(y + i - p) * wd + (j - p) + x_lo;
            acc += internal::Dot(a, b, x_hi - x_lo);
          }
          gw[i * k + j] += acc;
        }
      }
    }
  }
}

// Dense kernel array [out_channels, in_channels, size, size] in double.
struct KernelTensor {
  int out_channels = 1;
  int in_channels = 1;
  int size = 1;
  std::vector<double> w;

  KernelTensor() : w(1, 0.0) {}
  KernelTensor(int out, int in, int k)
      : out_channels(out), in_channels(in), size(k),
        w(static_cast<size_t>(out) * in * k * k, 0.0) {}

  double& at(int o, int i, int r, int c) {
    return w[((static_cast<size_t>(o) * in_channels + i) * size + r) * size + c];
  }
  double at(int o, int i, int r, int c) const {
    return w[((static_cast<size_t>(o) * in_channels + i) * size + r) * size + c];
  }
  int center() const { return (size - 1) / 2; }
};

// (K * f) with zero padding; "same" output size unless mode is kValid.
inline FeatureField CrossCorrelate(const KernelTensor& k, const FeatureField& f, int stride = 1,
                                   PadMode mode = PadMode::kSame) {
  if (k.in_channels != f.channels()) {
    throw std::invalid_argument("cross_correlate: kernel expects " + std::to_string(k.in_channels) +
                                " input channels, field has " + std::to_string(f.channels()));
  }
  if (stride <= 0) throw std::invalid_argument("cross_correlate: stride must be positive");
  CorrelationShape s{k.in_channels, k.out_channels, f.height(), f.width(), k.size, mode};
  s.Validate("cross_correlate");
  std::vector<double> out(s.out_size(), 0.0);
  CorrelateForward<double>(s, f.data(), k.w, out);
  const int oh = s.out_height(), ow = s.out_width();
  const int sh = (oh + stride - 1) / stride, sw = (ow + stride - 1) / stride;
  FeatureField r = FeatureField::Scalar(k.out_channels, sh, sw, f.pixel_pitch() * stride);
  for (int c = 0; c < k.out_channels; ++c) {
    for (int y = 0; y < sh; ++y) {
      for (int x = 0; x < sw; ++x) {
        r.at(c, y, x) = out[(static_cast<size_t>(c) * oh + y * stride) * ow + x * stride];
      }
    }
  }
  if (stride == 1 && mode == PadMode::kSame) r.set_origin(f.origin_row(), f.origin_col());
  return r;
}

}  // namespace eqtp

#endif  // EQTP_CORRELATE_HPP_
