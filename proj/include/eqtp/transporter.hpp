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

// Pick and place networks. The pick model factors into a pixel map f_p over
// the observation and an orientation head f_theta over a crop at the chosen
// pixel. The place model correlates the lifted crop features Psi(c) with
// scene features phi(pad(o_t)); channel i of the place map scores rotating
// the picked object by 2 pi i / n_place counterclockwise.

#ifndef EQTP_TRANSPORTER_HPP_
#define EQTP_TRANSPORTER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqtp/autodiff.hpp"
#include "eqtp/layers.hpp"
#include "eqtp/optim.hpp"

namespace eqtp {

struct PickPlaceAction {
  int pick_u = 0;  // row
  int pick_v = 0;  // column
  double pick_theta = 0.0;  // [0, pi)
  int place_u = 0;
  int place_v = 0;
  double place_theta = 0.0;  // [0, 2 pi), rotation from pick pose to place pose

  friend bool operator==(const PickPlaceAction&, const PickPlaceAction&) = default;

  std::string ToString() const {
    std::ostringstream os;
    os << "pick (" << pick_u << ", " << pick_v << ", " << pick_theta << ") place (" << place_u
       << ", " << place_v << ", " << place_theta << ")";
    return os.str();
  }
};

struct ModelConfig {
  int n_place = 36;
  int n_pick = 18;
  int hidden_order = 4;
  int pick_crop = 17;   // f_theta crop side
  int place_crop = 33;  // psi crop side
  int pad_size = 32;    // total padding added to each side length of o_t
  std::vector<int> unet_widths = {2, 4, 4};  // fiber copies per U-Net level
  int crop_width = 2;   // fiber copies in the crop networks
  int crop_blocks = 2;
  int kernel = 3;
  int place_dim = 1;    // channels of psi and phi outputs
  int obs_channels = 1; // channels per observation image
  bool goal = false;    // input is o_t stacked with o_g
  bool equivariant = true;
  double head_init = 0.01;

  int input_channels() const { return obs_channels * (goal ? 2 : 1); }

  void Validate() const {
    auto need = [](bool ok, const std::string& msg) {
      if (!ok) throw std::invalid_argument("model config: " + msg);
    };
    need(n_place > 0 && n_place % 2 == 0, "n_place must be positive and even");
    need(n_pick > 0, "n_pick must be positive");
    need(hidden_order >= 2, "hidden group order must be at least 2");
    need(pick_crop > 0 && pick_crop % 2 == 1, "pick_crop must be odd");
    need(place_crop > 0 && place_crop % 2 == 1, "place_crop must be odd");
    need(pad_size >= 0 && pad_size % 2 == 0, "pad_size must be even (split over both sides)");
    need(pad_size / 2 == (place_crop - 1) / 2,
         "pad_size / 2 must equal the place crop radius so the place map covers o_t");
    need(unet_widths.size() == 3, "unet_widths needs three entries");
    for (int w : unet_widths) need(w > 0, "widths must be positive");
    need(crop_width > 0 && crop_blocks >= 0, "crop network size");
    need(kernel % 2 == 1, "kernel must be odd");
    need(place_dim > 0 && obs_channels > 0, "channel counts must be positive");
  }
};

// Nearest bin for `theta` on a circle of `period` split into `bins`; ties go
// to the lower index.
inline int AngleBin(double theta, double period, int bins) {
  const double x = theta * bins / period;
  const long long b = static_cast<long long>(std::ceil(x - 0.5));
  return internal::PositiveMod(b, bins);
}

// First index of the maximum (lowest flat index wins ties).
template <typename V>
inline size_t ArgMax(const V& v) {
  return static_cast<size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Sequential argmax decoding of the three heads. `pick_map` is H x W,
// `angle_dist` has n_pick bins over [0, pi), `place_map` is n_place x H x W.
inline PickPlaceAction DecodeAction(std::span<const double> pick_map,
                                    std::span<const double> angle_dist,
                                    std::span<const double> place_map, int height, int width) {
  const size_t hw = static_cast<size_t>(height) * width;
  if (pick_map.size() != hw || place_map.size() % hw != 0 || angle_dist.empty()) {
    throw std::invalid_argument("decode_action: map sizes do not match " +
                                std::to_string(height) + "x" + std::to_string(width));
  }
  for (auto* m : {&pick_map, &angle_dist, &place_map}) {
    for (double v : *m) {
      if (!std::isfinite(v)) throw std::invalid_argument("decode_action: non-finite map");
    }
  }
  const int n_place = static_cast<int>(place_map.size() / hw);
  const int n_pick = static_cast<int>(angle_dist.size());
  PickPlaceAction a;
  const size_t p = ArgMax(pick_map);
  a.pick_u = static_cast<int>(p / width);
  a.pick_v = static_cast<int>(p % width);
  a.pick_theta = std::numbers::pi * static_cast<double>(ArgMax(angle_dist)) / n_pick;
  const size_t q = ArgMax(place_map);
  const size_t pix = q % hw;
  a.place_u = static_cast<int>(pix / width);
  a.place_v = static_cast<int>(pix % width);
  a.place_theta = kTwoPi * static_cast<double>(q / hw) / n_place;
  return a;
}

// Pick, orientation and place networks for one model variant.
template <typename T>
class TransporterModel {
 public:
  using Tensor = ad::Tensor<T>;

  TransporterModel(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg.Validate();
    std::mt19937_64 rng(seed);
    const int g = cfg.equivariant ? cfg.hidden_order : 0;
    const int plain = cfg.hidden_order;
    const int cin = cfg.input_channels();
    const int rep_order = std::max(g, 1);

    NetShape pick{cin, 1, cfg.unet_widths, cfg.kernel, g, cfg.head_init};
    pick_net_ = UNet<T>(&params_, "pick", pick, plain, rng);

    NetShape angle{cin, 1, {cfg.crop_width}, cfg.kernel, g, cfg.head_init};
    const FieldType angle_out =
        cfg.equivariant ? FieldType{Representation::Quotient(2 * cfg.n_pick, 2), 1}
                        : FieldType{Representation::Trivial(1), cfg.n_pick};
    angle_net_ = FlatNet<T>(&params_, "angle", angle, cfg.crop_blocks, angle_out, plain, rng,
                            FlatHead::kDense, cfg.pick_crop);

    NetShape psi{cin, cfg.place_dim, {cfg.crop_width}, cfg.kernel, g, 1.0};
    psi_net_ = FlatNet<T>(&params_, "psi", psi, cfg.crop_blocks,
                          FieldType{Representation::Trivial(rep_order), cfg.place_dim}, plain, rng);

    NetShape phi{cin, cfg.place_dim, cfg.unet_widths, cfg.kernel, g, cfg.head_init};
    phi_net_ = UNet<T>(&params_, "phi", phi, plain, rng);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  // f_p: [C,H,W] -> [1,H,W] logits.
  Tensor PickLogits(const Tensor& obs) const {
    CheckInput(obs);
    return pick_net_(obs);
  }

  // f_theta on a crop [C,k,k] -> [n_pick] logits over gripper angles in [0, pi).
  Tensor AngleLogits(const Tensor& crop) const {
    CheckCrop(crop, cfg_.pick_crop);
    return ad::Reshape(angle_net_(crop), {cfg_.n_pick});
  }

  // psi(c): [place_dim, k, k].
  Tensor CropFeatures(const Tensor& crop) const {
    CheckCrop(crop, cfg_.place_crop);
    return psi_net_(crop);
  }

  // phi(pad(o_t)): [place_dim, H + d, W + d].
  Tensor SceneFeatures(const Tensor& obs) const {
    CheckInput(obs);
    return phi_net_(ad::Pad(obs, cfg_.pad_size / 2));
  }

  // Correlation kernel [n_place, place_dim, k, k] supported on the inscribed
  // disk. The equivariant model lifts psi(c); the baseline applies psi to each
  // rotated copy of c.
  Tensor PlaceKernel(const Tensor& crop) const {
    if (cfg_.equivariant) return ad::LiftKernel(ad::MaskDisk(CropFeatures(crop)), cfg_.n_place);
    CheckCrop(crop, cfg_.place_crop);
    const Tensor lifted = ad::LiftKernel(crop, cfg_.n_place);
    std::vector<Tensor> per_rotation;
    per_rotation.reserve(cfg_.n_place);
    for (int i = 0; i < cfg_.n_place; ++i) per_rotation.push_back(ad::MaskDisk(psi_net_(ad::Slice(lifted, i))));
    return ad::Stack(per_rotation);
  }

  // [n_place, H, W] logits.
  Tensor PlaceLogits(const Tensor& obs, const Tensor& crop) const {
    return ad::Conv2d(SceneFeatures(obs), PlaceKernel(crop), PadMode::kValid);
  }

  Tensor CropAt(const Tensor& obs, int u, int v, int size) const {
    return ad::Crop(obs, CropStart(u, size), CropStart(v, size), size, size);
  }

  // Sum of the pick-pixel, pick-angle and place cross-entropies.
  Tensor Loss(const Tensor& obs, const PickPlaceAction& expert) const {
    CheckInput(obs);
    const int h = obs.dim(1), w = obs.dim(2);
    auto in_bounds = [&](int u, int v) { return u >= 0 && u < h && v >= 0 && v < w; };
    if (!in_bounds(expert.pick_u, expert.pick_v) || !in_bounds(expert.place_u, expert.place_v)) {
      throw std::invalid_argument("bc_loss: expert action out of bounds: " + expert.ToString());
    }
    const size_t hw = static_cast<size_t>(h) * w;
    const Tensor pick = PickLogits(obs);
    const Tensor l_pick = ad::SoftmaxCrossEntropy(
        ad::Reshape(pick, {static_cast<int>(hw)}),
        static_cast<size_t>(expert.pick_u) * w + expert.pick_v);
    const int bin = AngleBin(expert.pick_theta, std::numbers::pi, cfg_.n_pick);
    const Tensor l_angle = ad::SoftmaxCrossEntropy(
        AngleLogits(CropAt(obs, expert.pick_u, expert.pick_v, cfg_.pick_crop)), bin);
    const int ch = AngleBin(expert.place_theta, kTwoPi, cfg_.n_place);
    const Tensor place =
        PlaceLogits(obs, CropAt(obs, expert.pick_u, expert.pick_v, cfg_.place_crop));
    const Tensor l_place = ad::SoftmaxCrossEntropy(
        ad::Reshape(place, {static_cast<int>(place.size())}),
        ch * hw + static_cast<size_t>(expert.place_u) * w + expert.place_v);
    return ad::Add(ad::Add(l_pick, l_angle), l_place);
  }

  struct Outputs {
    std::vector<double> pick;   // H x W probabilities
    std::vector<double> angle;  // n_pick probabilities
    std::vector<double> place;  // n_place x H x W probabilities
    PickPlaceAction action;
  };

  // Greedy action: pick argmax, then orientation and place at that pixel.
  Outputs Predict(const FeatureField& obs) const {
    const Tensor x = Tensor::FromField(obs);
    Outputs out;
    out.pick = ad::Softmax<T>(PickLogits(x).data());
    const size_t p = ArgMax(out.pick);
    const int u = static_cast<int>(p / obs.width()), v = static_cast<int>(p % obs.width());
    out.angle = ad::Softmax<T>(AngleLogits(CropAt(x, u, v, cfg_.pick_crop)).data());
    out.place = ad::Softmax<T>(PlaceLogits(x, CropAt(x, u, v, cfg_.place_crop)).data());
    out.action = DecodeAction(out.pick, out.angle, out.place, obs.height(), obs.width());
    return out;
  }

  PickPlaceAction Act(const FeatureField& obs) const { return Predict(obs).action; }

 private:
  void CheckInput(const Tensor& obs) const {
    if (obs.shape().size() != 3 || obs.dim(0) != cfg_.input_channels()) {
      throw std::invalid_argument("model expects a [" + std::to_string(cfg_.input_channels()) +
                                  ",H,W] observation, got " + ad::ShapeString(obs.shape()));
    }
    for (T v : obs.data()) {
      if (!std::isfinite(static_cast<double>(v))) {
        throw std::invalid_argument("observation has non-finite entries");
      }
    }
  }

  void CheckCrop(const Tensor& crop, int size) const {
    if (crop.shape() != ad::Shape{cfg_.input_channels(), size, size}) {
      throw std::invalid_argument("crop must be [" + std::to_string(cfg_.input_channels()) + "," +
                                  std::to_string(size) + "," + std::to_string(size) + "], got " +
                                  ad::ShapeString(crop.shape()));
    }
  }

  ModelConfig cfg_;
  ParamStore<T> params_;
  UNet<T> pick_net_, phi_net_;
  FlatNet<T> angle_net_, psi_net_;
};

}  // namespace eqtp

#endif  // EQTP_TRANSPORTER_HPP_
