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

// Numerical property battery for the group, kernel, lifting and model
// equivariance properties. Each check returns a residual and a
// tolerance; shared by the unit tests, the `verify` command and the
// acceptance suite.

#ifndef EQTP_PROPERTIES_HPP_
#define EQTP_PROPERTIES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqtp/correlate.hpp"
#include "eqtp/feature_field.hpp"
#include "eqtp/group.hpp"
#include "eqtp/steerable.hpp"
#include "eqtp/transporter.hpp"

namespace eqtp::props {

struct PropertyResult {
  std::string id;
  std::string group;  // e.g. "C4", "C4xC4", "SO(2)"
  double residual = 0.0;
  double tolerance = 0.0;
  std::string metric;  // "max-abs", "rel-l2" or "ratio"

  bool pass() const { return std::isfinite(residual) && residual <= tolerance; }
};

struct PropertyOptions {
  int group = 4;             // C_n used by the model properties
  double tolerance = -1.0;   // overrides every row when positive
  int seeds = 20;            // random models per model property
  int trials = 50;           // random inputs per lemma
  uint64_t seed = 1;
  int size = 64;             // scene side
  double sigma = 1.5;        // smoothing for non-quarter-turn groups
  std::string sabotage;      // "baseline-prop2" runs the product-group row on the baseline
};

// Property IDs that `verify` must cover.
inline const std::vector<std::string>& ExpectedIds() {
  static const std::vector<std::string> ids = {
      "lemma1-slot-permutation", "lemma2-lift-rotation",    "lemma3-correlation-rotation",
      "lemma4-projector",        "lemma4-analytic-basis",   "prop1-baseline-place",
      "prop2-place",             "prop2-baseline-gap",      "prop3-steerable-generator",
      "equivariance-object",     "equivariance-scene",      "invariance",
      "relativity",              "pick-location",           "pick-angle",
      "goal-pick",               "goal-place"};
  return ids;
}

namespace internal {

inline bool Exact(int n) { return n == 4 || n == 2 || n == 1; }

inline Interp InterpFor(int n) { return Exact(n) ? Interp::kNearest : Interp::kBilinear; }

inline FeatureField Noise(int channels, int h, int w, std::mt19937_64& rng) {
  FeatureField f = FeatureField::Scalar(channels, h, w);
  std::normal_distribution<double> n;
  for (double& v : f.data()) v = n(rng);
  return f;
}

// Noise inside the inscribed disk (radius 0.35 * side) smoothed by sigma, so
// rotations neither clip content nor hit the aliasing floor.
inline FeatureField SmoothDisk(int channels, int size, double sigma, std::mt19937_64& rng) {
  FeatureField f = FeatureField::Scalar(channels, size, size);
  std::normal_distribution<double> n;
  const double c = (size - 1) / 2.0;
  for (int ch = 0; ch < channels; ++ch) {
    for (int r = 0; r < size; ++r) {
      for (int col = 0; col < size; ++col) {
        f.at(ch, r, col) = std::hypot(r - c, col - c) < 0.35 * size ? n(rng) : 0.0;
      }
    }
  }
  return GaussianSmooth(f, sigma);
}

// Random input for group order n: raw noise on the exact path, smoothed disk
// otherwise.
inline FeatureField Input(int channels, int size, int n, double sigma, std::mt19937_64& rng) {
  return Exact(n) ? Noise(channels, size, size, rng) : SmoothDisk(channels, size, sigma, rng);
}

// Mean-removed relative L2 inside the disk of the given radius about the
// center (all channels).
inline double DiskRelativeL2(const FeatureField& a, const FeatureField& b, double radius) {
  if (!a.SameShape(b)) throw std::invalid_argument("DiskRelativeL2: shape mismatch");
  const double cr = (a.height() - 1) / 2.0, cc = (a.width() - 1) / 2.0;
  double num = 0, den = 0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    double mean = 0;
    int count = 0;
    for (int r = 0; r < a.height(); ++r) {
      for (int c = 0; c < a.width(); ++c) {
        if (std::hypot(r - cr, c - cc) > radius) continue;
        mean += b.at(ch, r, c);
        ++count;
      }
    }
    mean /= std::max(count, 1);
    for (int r = 0; r < a.height(); ++r) {
      for (int c = 0; c < a.width(); ++c) {
        if (std::hypot(r - cr, c - cc) > radius) continue;
        const double d = a.at(ch, r, c) - b.at(ch, r, c);
        num += d * d;
        den += (b.at(ch, r, c) - mean) * (b.at(ch, r, c) - mean);
      }
    }
  }
  return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

// Residual for one comparison: max-abs on the exact path, disk relative L2
// otherwise. Maps of side `size` compare inside radius 0.35 * size.
inline double Compare(const FeatureField& lhs, const FeatureField& rhs, int n) {
  if (Exact(n)) return MaxAbsDiff(lhs, rhs);
  return DiskRelativeL2(lhs, rhs, 0.35 * std::min(lhs.height(), lhs.width()) - 1.0);
}

inline std::string GroupName(int n) { return n == 0 ? "SO(2)" : "C" + std::to_string(n); }

inline PropertyResult Row(std::string id, std::string group, double residual, double tol,
                          std::string metric, const PropertyOptions& o) {
  if (o.tolerance > 0) tol = o.tolerance;
  return {std::move(id), std::move(group), residual, tol, std::move(metric)};
}

inline std::string Metric(int n) { return Exact(n) ? "max-abs" : "rel-l2"; }

inline double ModelTolerance(int n) { return Exact(n) ? 1e-4 : 0.05; }

// Smallest multiple of m that is >= v.
inline int RoundUp(int v, int m) { return (v + m - 1) / m * m; }

// Default model adjusted so C_n acts exactly on the place channels and the
// pick-angle bins.
inline ModelConfig ModelFor(int n, bool equivariant, bool goal) {
  ModelConfig cfg;
  cfg.equivariant = equivariant;
  cfg.goal = goal;
  if (!Exact(n)) {
    cfg.hidden_order = n;
    cfg.n_place = RoundUp(cfg.n_place, n);
    if (n % 2 == 0) cfg.n_pick = RoundUp(cfg.n_pick, n / 2);
  }
  return cfg;
}

using Model = TransporterModel<double>;
using T = ad::Tensor<double>;

inline FeatureField Place(const Model& m, const FeatureField& o, const FeatureField& c) {
  FeatureField f = m.PlaceLogits(T::FromField(o), T::FromField(c)).ToField();
  f.set_fiber(Representation::Regular(m.config().n_place), 1);
  return f;
}

inline FeatureField Rot(const FeatureField& f, const GroupElement& g, int n) {
  return RotateBase(f, g, InterpFor(n));
}

// rho_reg(h) T^0_g applied to a place map.
inline FeatureField Act(const FeatureField& f, const GroupElement& h, const GroupElement& g,
                        int n) {
  return ActOnFiber(Rot(f, g, n), h);
}

inline GroupElement Difference(const GroupElement& a, const GroupElement& b) {
  return Compose(a, b.Inverse());
}

}  // namespace internal

// With the input duplicated into n slots and diagonal 1x1 kernels,
// cyclically permuting the kernel slots permutes the outputs the same way.
inline PropertyResult SlotPermutation(const PropertyOptions& o) {
  std::mt19937_64 rng(o.seed);
  const int n = std::max(o.group, 2);
  double worst = 0;
  for (int t = 0; t < o.trials; ++t) {
    const FeatureField x = internal::Noise(1, 12, 12, rng);
    FeatureField dup = FeatureField::Scalar(n, 12, 12);
    for (int i = 0; i < n; ++i) std::copy(x.plane(0).begin(), x.plane(0).end(), dup.plane(i).begin());
    std::vector<double> diag(n);
    for (double& v : diag) v = std::normal_distribution<double>()(rng);
    const int shift = static_cast<int>(rng() % n);
    KernelTensor k(n, n, 1), kp(n, n, 1);
    for (int i = 0; i < n; ++i) {
      k.at(i, i, 0, 0) = diag[i];
      kp.at(i, i, 0, 0) = diag[ShiftSource(i, shift, n)];
    }
    const FeatureField y = CrossCorrelate(k, dup), yp = CrossCorrelate(kp, dup);
    for (int i = 0; i < n; ++i) {
      const auto a = yp.plane(i), b = y.plane(ShiftSource(i, shift, n));
      for (size_t p = 0; p < a.size(); ++p) worst = std::max(worst, std::abs(a[p] - b[p]));
    }
  }
  return internal::Row("lemma1-slot-permutation", internal::GroupName(n), worst, 1e-10, "max-abs",
                       o);
}

// lift(T_g c) = rho_reg(-g) lift(c).
inline PropertyResult LiftRotation(const PropertyOptions& o) {
  std::mt19937_64 rng(o.seed + 1);
  const int n = o.group;
  double worst = 0;
  for (int t = 0; t < o.trials; ++t) {
    FeatureField c = internal::Input(1, 33, n, o.sigma, rng);
    for (const GroupElement& g : Elements(n)) {
      FeatureField lhs = Lift(internal::Rot(c, g, n), n, internal::InterpFor(n));
      FeatureField rhs = ActOnFiber(Lift(c, n, internal::InterpFor(n)), g.Inverse());
      worst = std::max(worst, internal::Compare(lhs, rhs, n));
    }
  }
  return internal::Row("lemma2-lift-rotation", internal::GroupName(n), worst,
                       internal::Exact(n) ? 1e-12 : 0.05, internal::Metric(n), o);
}

// T_g(K * f) = (T_g K) * (T_g f).
inline PropertyResult CorrelationRotation(const PropertyOptions& o) {
  std::mt19937_64 rng(o.seed + 2);
  const int n = o.group;
  double worst = 0;
  for (int t = 0; t < o.trials; ++t) {
    // 2x2 kernel of side 9; tapered and smoothed off the exact path.
    KernelTensor k(2, 2, 9);
    k.w = internal::Input(4, 9, n, 1.0, rng).data();
    const FeatureField f = internal::Input(2, 33, n, o.sigma, rng);
    for (const GroupElement& g : Elements(n)) {
      FeatureField kf = FeatureField::Scalar(4, 9, 9);
      kf.data() = k.w;
      KernelTensor kg = k;
      kg.w = internal::Rot(kf, g, n).data();
      const FeatureField lhs = internal::Rot(CrossCorrelate(k, f), g, n);
      const FeatureField rhs = CrossCorrelate(kg, internal::Rot(f, g, n));
      worst = std::max(worst, internal::Compare(lhs, rhs, n));
    }
  }
  return internal::Row("lemma3-correlation-rotation", internal::GroupName(n), worst,
                       internal::Exact(n) ? 1e-10 : 0.05, internal::Metric(n), o);
}

// Projector path: T_g K = rho_out(g^-1) K for projected
// trivial-input kernels at C4.
inline PropertyResult ProjectorSteerability(const PropertyOptions& o) {
  std::mt19937_64 rng(o.seed + 3);
  double worst = 0;
  for (int t = 0; t < o.trials; ++t) {
    const Representation out =
        t % 2 == 0 ? Representation::Regular(4) : Representation::Quotient(4, 2);
    KernelTensor raw(2 * out.dim(), 1, 5);
    for (double& v : raw.w) v = std::normal_distribution<double>()(rng);
    const SteerableKernel k = ProjectKernel(raw, Representation::Trivial(4), out, 4);
    for (const GroupElement& g : Elements(4)) worst = std::max(worst, SpatialRotationResidual(k, g));
  }
  return internal::Row("lemma4-projector", "C4", worst, 1e-10, "max-abs", o);
}

// Analytic path: every basis element with trivial input at
// C4, C6 and C8.
inline PropertyResult AnalyticSteerability(const PropertyOptions& o) {
  double worst = 0;
  for (int n : {4, 6, 8}) {
    for (const Representation& out :
         {Representation::Regular(n), Representation::Standard(n), Representation::Irrep(n, 2)}) {
      const KernelBasis basis = BuildKernelBasis(Representation::Trivial(n), out, n, 7);
      for (const SteerableKernel& k : basis.elements) {
        for (const GroupElement& g : Elements(n)) worst = std::max(worst, SpatialRotationResidual(k, g));
      }
    }
  }
  return internal::Row("lemma4-analytic-basis", "C4,C6,C8", worst, 1e-6, "max-abs", o);
}

// Baseline place model: rotating the crop by g permutes
// the place channels by -g.
// `pooled_out` receives the relative L2 over all seeds and rotations stacked.
inline PropertyResult BaselinePlaceEquivariance(const PropertyOptions& o, double* pooled_out = nullptr) {
  const int n = o.group;
  const ModelConfig cfg = internal::ModelFor(n, false, false);
  double worst = 0, err2 = 0, ref2 = 0;
  for (int s = 0; s < o.seeds; ++s) {
    std::mt19937_64 rng(o.seed * 1000 + s);
    const internal::Model m(cfg, o.seed * 1000 + s);
    const FeatureField scene = internal::Input(1, o.size, n, o.sigma, rng);
    const FeatureField crop = internal::Input(1, cfg.place_crop, n, o.sigma, rng);
    const FeatureField base = internal::Place(m, scene, crop);
    for (const GroupElement& g : Elements(n)) {
      if (g.is_identity()) continue;
      const FeatureField lhs = internal::Place(m, scene, internal::Rot(crop, g, n));
      const FeatureField rhs = ActOnFiber(base, g.Inverse());
      worst = std::max(worst, internal::Exact(n) ? MaxAbsDiff(lhs, rhs) : RelativeL2(lhs, rhs));
      for (size_t i = 0; i < lhs.data().size(); ++i) {
        const double d = lhs.data()[i] - rhs.data()[i];
        err2 += d * d;
        ref2 += rhs.data()[i] * rhs.data()[i];
      }
    }
  }
  if (pooled_out) *pooled_out = ref2 > 0 ? std::sqrt(err2 / ref2) : 0.0;
  return internal::Row("prop1-baseline-place", internal::GroupName(n), worst,
                       internal::ModelTolerance(n), internal::Metric(n), o);
}

namespace internal {

// Max over all (g1, g2) of the product-group residual.
inline double ProductResidual(const Model& m, const FeatureField& scene, const FeatureField& crop,
                            int n) {
  const FeatureField base = Place(m, scene, crop);
  double worst = 0;
  for (const GroupElement& g2 : Elements(n)) {
    const FeatureField rotated_scene = Rot(scene, g2, n);
    for (const GroupElement& g1 : Elements(n)) {
      const FeatureField lhs = Place(m, rotated_scene, Rot(crop, g1, n));
      const FeatureField rhs = Act(base, Difference(g2, g1), g2, n);
      worst = std::max(worst, Compare(lhs, rhs, n));
    }
  }
  return worst;
}

}  // namespace internal

// place(T_g2 o, T_g1 c) = rho_reg(g2 - g1) T_g2 place(o, c)
// for all pairs. The sabotage mode evaluates the baseline instead.
inline PropertyResult PlaceProductEquivariance(const PropertyOptions& o) {
  const int n = o.group;
  const bool equivariant = o.sabotage != "baseline-prop2";
  const ModelConfig cfg = internal::ModelFor(n, equivariant, false);
  double worst = 0;
  for (int s = 0; s < o.seeds; ++s) {
    std::mt19937_64 rng(o.seed * 2000 + s);
    const internal::Model m(cfg, o.seed * 2000 + s);
    const FeatureField scene = internal::Input(1, o.size, n, o.sigma, rng);
    const FeatureField crop = internal::Input(1, cfg.place_crop, n, o.sigma, rng);
    worst = std::max(worst, internal::ProductResidual(m, scene, crop, n));
  }
  return internal::Row("prop2-place", internal::GroupName(n) + "x" + internal::GroupName(n), worst,
                       internal::ModelTolerance(n), internal::Metric(n), o);
}

// Discriminating negative: with g2 != identity the baseline's product-group
// residual must exceed the equivariant model's by at least 10x. Residual is
// the ratio equivariant / baseline.
inline PropertyResult BaselineProductGap(const PropertyOptions& o, double* eq_out = nullptr,
                               double* base_out = nullptr) {
  const int n = o.group;
  double eq = 0, base = 0;
  for (int s = 0; s < std::max(1, std::min(o.seeds, 3)); ++s) {
    std::mt19937_64 rng(o.seed * 3000 + s);
    const ModelConfig cfg = internal::ModelFor(n, true, false);
    const FeatureField scene = internal::Input(1, o.size, n, o.sigma, rng);
    const FeatureField crop = internal::Input(1, cfg.place_crop, n, o.sigma, rng);
    const internal::Model me(cfg, o.seed * 3000 + s);
    const internal::Model mb(internal::ModelFor(n, false, false), o.seed * 3000 + s);
    // Relative residuals so the two models' output scales do not matter.
    auto rel = [&](const internal::Model& m) {
      const FeatureField base_map = internal::Place(m, scene, crop);
      double w = 0;
      for (const GroupElement& g2 : Elements(n)) {
        if (g2.is_identity()) continue;
        const FeatureField rotated_scene = internal::Rot(scene, g2, n);
        for (const GroupElement& g1 : Elements(n)) {
          const FeatureField lhs = internal::Place(m, rotated_scene, internal::Rot(crop, g1, n));
          const FeatureField rhs =
              internal::Act(base_map, internal::Difference(g2, g1), g2, n);
          w = std::max(w, internal::DiskRelativeL2(lhs, rhs, 1e9));
        }
      }
      return w;
    };
    eq = std::max(eq, rel(me));
    base = std::max(base, rel(mb));
  }
  if (eq_out) *eq_out = eq;
  if (base_out) *base_out = base;
  const double ratio = base == 0 ? INFINITY : eq / base;
  return internal::Row("prop2-baseline-gap", internal::GroupName(n), ratio, 0.1, "ratio", o);
}

// Analytic harmonic generator with phi = identity:
// Psi(T_g1 c) * T_g2 o = rho_m(g2 - g1) T_g2 (Psi(c) * o) for angles drawn
// from SO(2), output frequencies 0..4, band-limited inputs.
inline PropertyResult SteerableGenerator(const PropertyOptions& o) {
  std::mt19937_64 rng(o.seed + 4);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  // Inputs smoothed at sigma 3: sampled frequency-4 harmonics need it.
  const double sigma = 3.0;
  const int scene_size = 64;
  double worst = 0;
  for (int m = 0; m <= 4; ++m) {
    // Rings start at radius max(1, m), the same band limit as the analytic
    // basis.
    const int first = std::max(1, m);
    std::vector<RadialRing> rings;
    for (int r = first; r < first + 4; ++r) rings.push_back({static_cast<double>(r), 0.6});
    const HarmonicKernelGenerator gen(m, 2 * (first + 4) + 1, rings);
    const FeatureField crop = internal::SmoothDisk(1, 33, sigma, rng);
    const FeatureField scene = internal::SmoothDisk(1, scene_size, sigma, rng);
    const Representation rep = Representation::Irrep(0, m);
    FeatureField base = CrossCorrelate(gen.Generate(crop).weights, scene);
    base.set_fiber(rep, 1);
    for (int t = 0; t < 8; ++t) {
      const GroupElement g1 = GroupElement::Continuous(angle(rng));
      const GroupElement g2 = GroupElement::Continuous(angle(rng));
      FeatureField lhs =
          CrossCorrelate(gen.Generate(RotateBase(crop, g1, Interp::kBilinear)).weights,
                         RotateBase(scene, g2, Interp::kBilinear));
      lhs.set_fiber(rep, 1);
      const GroupElement d = GroupElement::Continuous(g2.angle() - g1.angle());
      const FeatureField rhs = ActOnFiber(RotateBase(base, g2, Interp::kBilinear), d);
      worst = std::max(worst, internal::DiskRelativeL2(lhs, rhs, 0.35 * scene_size - 1));
    }
  }
  return internal::Row("prop3-steerable-generator", "SO(2)", worst, 0.05, "rel-l2", o);
}

// Consequences of the product-group property on the equivariant model:
//   equivariance-object: place(o, T_g c) = rho(-g) place(o, c)
//   equivariance-scene:  place(T_g o, c) = rho(g) T_g place(o, c)
//   invariance:          place(T_g o, T_g c) = T_g place(o, c)
//   relativity:          place(o, T_g c) = T_g place(T_-g o, c)
inline std::vector<PropertyResult> PlaceCorollaries(const PropertyOptions& o, bool goal = false) {
  const int n = o.group;
  const ModelConfig cfg = internal::ModelFor(n, true, goal);
  double eq_obj = 0, eq_scene = 0, inv = 0, rel = 0;
  const GroupElement id = GroupElement::Identity(n);
  for (int s = 0; s < o.seeds; ++s) {
    std::mt19937_64 rng(o.seed * 4000 + s);
    const internal::Model m(cfg, o.seed * 4000 + s);
    const int ch = cfg.input_channels();
    const FeatureField scene = internal::Input(ch, o.size, n, o.sigma, rng);
    const FeatureField crop = internal::Input(ch, cfg.place_crop, n, o.sigma, rng);
    const FeatureField base = internal::Place(m, scene, crop);
    for (const GroupElement& g : Elements(n)) {
      if (g.is_identity()) continue;
      const FeatureField object_rotated = internal::Place(m, scene, internal::Rot(crop, g, n));
      eq_obj = std::max(eq_obj, internal::Compare(object_rotated, ActOnFiber(base, g.Inverse()), n));
      const FeatureField rotated_scene = internal::Rot(scene, g, n);
      eq_scene = std::max(eq_scene, internal::Compare(internal::Place(m, rotated_scene, crop),
                                                      internal::Act(base, g, g, n), n));
      inv = std::max(inv, internal::Compare(
                              internal::Place(m, rotated_scene, internal::Rot(crop, g, n)),
                              internal::Act(base, id, g, n), n));
      const FeatureField inverse_scene = internal::Place(m, internal::Rot(scene, g.Inverse(), n), crop);
      rel = std::max(rel, internal::Compare(object_rotated, internal::Act(inverse_scene, id, g, n), n));
    }
  }
  const std::string gn = internal::GroupName(n);
  const double tol = internal::ModelTolerance(n);
  const std::string metric = internal::Metric(n);
  if (goal) return {internal::Row("goal-place", gn + "x" + gn, std::max({eq_obj, eq_scene, inv, rel}), tol, metric, o)};
  return {internal::Row("equivariance-object", gn, eq_obj, tol, metric, o),
          internal::Row("equivariance-scene", gn, eq_scene, tol, metric, o),
          internal::Row("invariance", gn, inv, tol, metric, o),
          internal::Row("relativity", gn, rel, tol, metric, o)};
}

// Pick location equivariance: f_p(T_g o) = T_g f_p(o). With `goal` the input
// is the stacked (o_t, o_g) pair.
inline PropertyResult PickLocation(const PropertyOptions& o, bool goal = false) {
  const int n = o.group;
  const ModelConfig cfg = internal::ModelFor(n, true, goal);
  double worst = 0;
  for (int s = 0; s < o.seeds; ++s) {
    std::mt19937_64 rng(o.seed * 5000 + s);
    const internal::Model m(cfg, o.seed * 5000 + s);
    const FeatureField scene = internal::Input(cfg.input_channels(), o.size, n, o.sigma, rng);
    const FeatureField base = m.PickLogits(internal::T::FromField(scene)).ToField();
    for (const GroupElement& g : Elements(n)) {
      if (g.is_identity()) continue;
      const FeatureField lhs =
          m.PickLogits(internal::T::FromField(internal::Rot(scene, g, n))).ToField();
      worst = std::max(worst, internal::Compare(lhs, internal::Rot(base, g, n), n));
    }
  }
  return internal::Row(goal ? "goal-pick" : "pick-location", internal::GroupName(n), worst,
                       internal::ModelTolerance(n), internal::Metric(n), o);
}

// Pick angle: f_theta(T_g c) = shift of f_theta(c) by g on the [0, pi) bins.
inline PropertyResult PickAngle(const PropertyOptions& o) {
  const int n = o.group;
  const ModelConfig cfg = internal::ModelFor(n, true, false);
  double worst = 0;
  for (int s = 0; s < o.seeds; ++s) {
    std::mt19937_64 rng(o.seed * 6000 + s);
    const internal::Model m(cfg, o.seed * 6000 + s);
    const FeatureField crop = internal::Input(1, cfg.pick_crop, n, o.sigma, rng);
    const auto base = m.AngleLogits(internal::T::FromField(crop)).data();
    for (const GroupElement& g : Elements(n)) {
      if (g.is_identity()) continue;
      const auto lhs = m.AngleLogits(internal::T::FromField(internal::Rot(crop, g, n))).data();
      const OrientationDistribution rhs = ShiftOrientation({base, std::numbers::pi}, g);
      double num = 0, den = 0, mx = 0;
      for (size_t i = 0; i < lhs.size(); ++i) {
        mx = std::max(mx, std::abs(lhs[i] - rhs.values[i]));
        num += (lhs[i] - rhs.values[i]) * (lhs[i] - rhs.values[i]);
        den += rhs.values[i] * rhs.values[i];
      }
      worst = std::max(worst, internal::Exact(n) ? mx : std::sqrt(num / std::max(den, 1e-300)));
    }
  }
  return internal::Row("pick-angle", internal::GroupName(n), worst, internal::ModelTolerance(n),
                       internal::Metric(n), o);
}

// The full battery in ExpectedIds() order.
inline std::vector<PropertyResult> RunAll(const PropertyOptions& o) {
  std::vector<PropertyResult> rows = {SlotPermutation(o), LiftRotation(o), CorrelationRotation(o), ProjectorSteerability(o),
                                      AnalyticSteerability(o), BaselinePlaceEquivariance(o), PlaceProductEquivariance(o), BaselineProductGap(o),
                                      SteerableGenerator(o)};
  for (auto& r : PlaceCorollaries(o)) rows.push_back(r);
  rows.push_back(PickLocation(o));
  rows.push_back(PickAngle(o));
  rows.push_back(PickLocation(o, true));
  rows.push_back(PlaceCorollaries(o, true).front());
  return rows;
}

}  // namespace eqtp::props

#endif  // EQTP_PROPERTIES_HPP_
