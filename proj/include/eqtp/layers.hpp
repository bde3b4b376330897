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

// Convolution layers over regular-representation feature fields, residual
// blocks and the U-Net used by the pick and place networks. Every layer can be
// built equivariant (weights re-projected onto the steerable subspace on each
// forward pass) or plain (same shapes, unconstrained).

#ifndef EQTP_LAYERS_HPP_
#define EQTP_LAYERS_HPP_

#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "eqtp/autodiff.hpp"
#include "eqtp/correlate.hpp"
#include "eqtp/optim.hpp"
#include "eqtp/steerable.hpp"

namespace eqtp {

// A fiber type: `copies` stacked copies of `rep`.
struct FieldType {
  Representation rep = Representation::Trivial(1);
  int copies = 1;

  int channels() const { return rep.dim() * copies; }
};

// Largest cyclic group on which both types are defined and which divides
// `hidden_order`.
inline int ConstraintGroup(const FieldType& in, const FieldType& out, int hidden_order) {
  int n = hidden_order;
  for (const FieldType* t : {&in, &out}) {
    if (t->rep.kind() == RepKind::kRegular || t->rep.kind() == RepKind::kQuotient) {
      n = std::gcd(n, t->rep.group_order());
    }
  }
  return n;
}

template <typename T>
class Conv {
 public:
  Conv() = default;

  // `group_order` 0 builds a plain convolution with the same shapes.
  Conv(ParamStore<T>* params, const std::string& name, FieldType in, FieldType out, int kernel,
       int group_order, std::mt19937_64& rng, double init_scale = 1.0,
       PadMode mode = PadMode::kSame)
      : in_(in), out_(out), kernel_(kernel), mode_(mode) {
    const int cin = in.channels(), cout = out.channels();
    const double std_dev = init_scale * std::sqrt(2.0 / (cin * kernel * kernel));
    std::normal_distribution<double> nd(0.0, std_dev);
    std::vector<T> w(static_cast<size_t>(cout) * cin * kernel * kernel);
    for (T& v : w) v = static_cast<T>(nd(rng));
    raw_ = params->Add(name + ".weight", {cout, cin, kernel, kernel}, std::move(w));
    bias_raw_ = params->Add(name + ".bias", {cout}, std::vector<T>(cout, T(0)));
    if (group_order > 0) {
      const int n = ConstraintGroup(in, out, group_order);
      proj_ = std::make_shared<const SparseLinearMap>(
          BuildKernelProjector(in.rep, in.copies, out.rep, out.copies, kernel, n));
      bias_proj_ = std::make_shared<const SparseLinearMap>(BuildBiasProjector(out.rep, out.copies, n));
    }
  }

  bool equivariant() const { return proj_ != nullptr; }
  const FieldType& in_type() const { return in_; }
  const FieldType& out_type() const { return out_; }

  ad::Tensor<T> Weight() const {
    return proj_ ? ad::LinearMap(raw_, proj_, raw_.shape()) : raw_;
  }
  ad::Tensor<T> Bias() const {
    return bias_proj_ ? ad::LinearMap(bias_raw_, bias_proj_, bias_raw_.shape()) : bias_raw_;
  }

  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const {
    return ad::AddBias(ad::Conv2d(x, Weight(), mode_), Bias());
  }

 private:
  FieldType in_, out_;
  int kernel_ = 1;
  PadMode mode_ = PadMode::kSame;
  ad::Tensor<T> raw_, bias_raw_;
  std::shared_ptr<const SparseLinearMap> proj_, bias_proj_;
};

// relu(conv2(relu(conv1(x))) + shortcut(x)).
template <typename T>
class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(ParamStore<T>* params, const std::string& name, FieldType in, FieldType out,
           int kernel, int group_order, std::mt19937_64& rng)
      : conv1_(params, name + ".conv1", in, out, kernel, group_order, rng),
        conv2_(params, name + ".conv2", out, out, kernel, group_order, rng) {
    if (in.channels() != out.channels() || !(in.rep == out.rep)) {
      shortcut_ = Conv<T>(params, name + ".shortcut", in, out, 1, group_order, rng);
      has_shortcut_ = true;
    }
  }

  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const {
    ad::Tensor<T> y = conv2_(ad::Relu(conv1_(x)));
    return ad::Relu(ad::Add(y, has_shortcut_ ? shortcut_(x) : x));
  }

 private:
  Conv<T> conv1_, conv2_, shortcut_;
  bool has_shortcut_ = false;
};

struct NetShape {
  int in_channels = 1;        // trivial input channels
  int out_channels = 1;       // trivial output channels
  std::vector<int> widths;    // hidden fiber copies per level
  int kernel = 3;
  int group_order = 4;        // hidden regular group; 0 = plain network
  double head_init = 1.0;     // scale of the output layer's initial weights
};

// Encoder-decoder with two 2x poolings and additive skips: stem, two down
// blocks, two up blocks, head. Spatial sizes must be divisible by 4.
template <typename T>
class UNet {
 public:
  UNet() = default;
  UNet(ParamStore<T>* params, const std::string& name, const NetShape& s, int plain_order,
       std::mt19937_64& rng) {
    if (s.widths.size() != 3) throw std::invalid_argument("U-Net needs three widths");
    const int g = s.group_order;
    auto hidden = [&](int copies) {
      // Plain twins use `plain_order` channels per copy to match shapes.
      return g > 0 ? FieldType{Representation::Regular(g), copies}
                   : FieldType{Representation::Trivial(1), copies * plain_order};
    };
    const FieldType in{Representation::Trivial(std::max(g, 1)), s.in_channels};
    const FieldType out{Representation::Trivial(std::max(g, 1)), s.out_channels};
    const FieldType h1 = hidden(s.widths[0]), h2 = hidden(s.widths[1]), h3 = hidden(s.widths[2]);
    stem_ = Conv<T>(params, name + ".stem", in, h1, s.kernel, g, rng);
    down1_ = ResBlock<T>(params, name + ".down1", h1, h2, s.kernel, g, rng);
    down2_ = ResBlock<T>(params, name + ".down2", h2, h3, s.kernel, g, rng);
    up1_ = ResBlock<T>(params, name + ".up1", h3, h2, s.kernel, g, rng);
    up2_ = ResBlock<T>(params, name + ".up2", h2, h1, s.kernel, g, rng);
    head_ = Conv<T>(params, name + ".head", h1, out, s.kernel, g, rng, s.head_init);
  }

  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const {
    if (x.dim(1) % 4 != 0 || x.dim(2) % 4 != 0) {
      throw std::invalid_argument("U-Net input " + ad::ShapeString(x.shape()) +
                                  " must have sides divisible by 4");
    }
    const ad::Tensor<T> e0 = ad::Relu(stem_(x));
    const ad::Tensor<T> e1 = down1_(ad::MaxPool2(e0));
    const ad::Tensor<T> e2 = down2_(ad::MaxPool2(e1));
    const ad::Tensor<T> d1 = ad::Add(up1_(ad::UpsampleBilinear2(e2)), e1);
    const ad::Tensor<T> d0 = ad::Add(up2_(ad::UpsampleBilinear2(d1)), e0);
    return head_(d0);
  }

 private:
  Conv<T> stem_, head_;
  ResBlock<T> down1_, down2_, up1_, up2_;
};

// How a FlatNet maps its last hidden features to the output.
enum class FlatHead {
  kSame,   // k x k convolution, output keeps the crop size
  kPool,   // disk average pool, then 1 x 1
  kDense,  // one crop-sized kernel over the disk, output 1 x 1
};

// Full-resolution stack: stem, `blocks` residual blocks, head. Used on crops,
// where pooling would break the odd-sized center alignment.
template <typename T>
class FlatNet {
 public:
  FlatNet() = default;
  // `crop` is the input side; only kDense uses it.
  FlatNet(ParamStore<T>* params, const std::string& name, const NetShape& s, int blocks,
          FieldType out, int plain_order, std::mt19937_64& rng, FlatHead head = FlatHead::kSame,
          int crop = 0)
      : head_mode_(head) {
    const int g = s.group_order;
    const FieldType in{Representation::Trivial(std::max(g, 1)), s.in_channels};
    const FieldType h = g > 0 ? FieldType{Representation::Regular(g), s.widths.at(0)}
                              : FieldType{Representation::Trivial(1), s.widths.at(0) * plain_order};
    stem_ = Conv<T>(params, name + ".stem", in, h, s.kernel, g, rng);
    for (int b = 0; b < blocks; ++b) {
      blocks_.emplace_back(params, name + ".block" + std::to_string(b), h, h, s.kernel, g, rng);
    }
    switch (head) {
      case FlatHead::kSame:
        head_ = Conv<T>(params, name + ".head", h, out, s.kernel, g, rng, s.head_init);
        break;
      case FlatHead::kPool:
        head_ = Conv<T>(params, name + ".head", h, out, 1, g, rng, s.head_init);
        break;
      case FlatHead::kDense:
        if (crop <= 0 || crop % 2 == 0) throw std::invalid_argument("dense head needs an odd crop size");
        head_ = Conv<T>(params, name + ".head", h, out, crop, g, rng, s.head_init, PadMode::kValid);
        break;
    }
  }

  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const {
    ad::Tensor<T> y = ad::Relu(stem_(x));
    for (const auto& b : blocks_) y = b(y);
    if (head_mode_ == FlatHead::kPool) y = ad::GlobalAvgPool(ad::MaskDisk(y));
    if (head_mode_ == FlatHead::kDense) y = ad::MaskDisk(y);
    return head_(y);
  }

 private:
  FlatHead head_mode_ = FlatHead::kSame;
  Conv<T> stem_, head_;
  std::vector<ResBlock<T>> blocks_;
};

}  // namespace eqtp

#endif  // EQTP_LAYERS_HPP_
