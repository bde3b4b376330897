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

// Planar pick-and-place bench: rigid polygonal objects on a square
// workspace, top-down depth rendering, scripted experts and pose-based
// success checks.

#ifndef EQTP_BENCH_HPP_
#define EQTP_BENCH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqtp/feature_field.hpp"
#include "eqtp/transporter.hpp"

namespace eqtp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

inline Vec2 Rotate(Vec2 p, double c, double s) { return {c * p.x - s * p.y, s * p.x + c * p.y}; }
inline Vec2 Rotate(Vec2 p, double theta) { return Rotate(p, std::cos(theta), std::sin(theta)); }

using Polygon = std::vector<Vec2>;

// Even-odd rule; works for non-convex simple polygons.
inline bool PointInPolygon(Vec2 p, const Polygon& poly) {
  bool inside = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

inline Polygon RectanglePolygon(double w, double h) {
  return {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
}

inline Polygon CirclePolygon(double r, int n = 48) {
  Polygon p;
  for (int i = 0; i < n; ++i) {
    const double a = kTwoPi * i / n;
    p.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return p;
}

// L with a square corner of side `thick` centered at the origin and arms of
// reach `len` (from the origin) along +x and +y.
inline Polygon LPolygon(double thick, double len) {
  const double a = thick / 2;
  return {{-a, -a}, {len, -a}, {len, a}, {a, a}, {a, len}, {-a, len}};
}

// Thin corner marker hugging the first quadrant from outside.
inline Polygon CornerMarkerPolygon(double thick, double len) {
  return {{-thick, -thick}, {len, -thick}, {len, 0}, {0, 0}, {0, len}, {-thick, len}};
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 ToWorld(Vec2 local) const { return position() + Rotate(local, theta); }
  Vec2 ToLocal(Vec2 world) const { return Rotate(world - position(), -theta); }
};

// Union of solid polygons minus holes, in the object frame.
struct Shape {
  std::vector<Polygon> solids;
  std::vector<Polygon> holes;

  bool Contains(Vec2 local) const {
    for (const auto& h : holes) {
      if (PointInPolygon(local, h)) return false;
    }
    for (const auto& s : solids) {
      if (PointInPolygon(local, s)) return true;
    }
    return false;
  }

  double BoundingRadius() const {
    double r = 0;
    for (const auto& s : solids) {
      for (Vec2 v : s) r = std::max(r, std::hypot(v.x, v.y));
    }
    return r;
  }
};

enum class Role { kPickable, kFixture, kGoalMarker };

struct Object {
  std::string name;
  Shape shape;
  Pose pose;
  double height = 0.02;  // meters
  Role role = Role::kPickable;
  double symmetry = kTwoPi;  // smallest rotation mapping the shape to itself; 0 = any
  double grasp_axis = 0.0;   // gripper angle in the object frame
  double grasp_period = std::numbers::pi;  // grasp angles equal modulo this; 0 = any
  Vec2 grasp_point;          // object frame
};

struct TaskSpec {
  std::string name;
  double tau = 0.01;                       // meters
  double omega = std::numbers::pi / 12;    // radians
  double grasp_tolerance = std::numbers::pi / 12;
  int max_steps = 1;

  bool goal_conditioned() const { return name == "goal-insertion"; }
};

inline const std::vector<std::string>& TaskNames() {
  static const std::vector<std::string> names = {"block-insertion", "place-disk-in-ring",
                                                 "align-corner", "goal-insertion"};
  return names;
}

inline TaskSpec MakeTask(const std::string& name) {
  if (std::find(TaskNames().begin(), TaskNames().end(), name) == TaskNames().end()) {
    throw std::invalid_argument("unknown task '" + name + "'");
  }
  TaskSpec t;
  t.name = name;
  return t;
}

struct Scene {
  TaskSpec task;
  uint64_t seed = 0;
  int height = 64;  // pixels
  int width = 64;
  double pixel_pitch = 0.005;  // meters per pixel
  std::vector<Object> objects;
  int target_object = 0;   // index of the object to be placed
  Pose target;             // goal pose of that object
  int required_placements = 1;
  int placements_done = 0;
  int steps = 0;
  std::mt19937_64 rng;     // oracle jitter

  double world_width() const { return width * pixel_pitch; }
  double world_height() const { return height * pixel_pitch; }

  Vec2 PixelCenter(int row, int col) const {
    return {(col + 0.5) * pixel_pitch, (height - row - 0.5) * pixel_pitch};
  }
  void WorldToPixel(Vec2 p, int* row, int* col) const {
    *col = static_cast<int>(std::floor(p.x / pixel_pitch));
    *row = static_cast<int>(std::floor(height - p.y / pixel_pitch));
  }
  bool InBounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
};

// Depth normalization: heights are divided by this and clamped to [0, 1].
inline constexpr double kMaxDepth = 0.04;

namespace internal {

inline double AngleDistance(double a, double b, double period) {
  if (period <= 0) return 0.0;
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

inline Object MakeLBlock() {
  Object o;
  o.name = "l-block";
  o.shape.solids = {LPolygon(0.02, 0.05)};
  o.height = 0.03;
  o.role = Role::kPickable;
  o.symmetry = kTwoPi;
  // The jaws close on the square corner, which holds along either side.
  o.grasp_period = std::numbers::pi / 2;
  return o;
}

inline Object MakeLFixture() {
  const double clearance = 0.003, wall = 0.01;
  Object o;
  o.name = "l-fixture";
  o.shape.solids = {LPolygon(0.02 + 2 * clearance + 2 * wall, 0.05 + clearance + wall)};
  o.shape.holes = {LPolygon(0.02 + 2 * clearance, 0.05 + clearance)};
  o.height = 0.015;
  o.role = Role::kFixture;
  return o;
}

// Samples a pose whose shape lies inside the workspace with `margin`.
inline Pose SamplePose(const Scene& s, const Object& o, double margin, std::mt19937_64& rng) {
  const double r = o.shape.BoundingRadius() + margin;
  std::uniform_real_distribution<double> ux(r, s.world_width() - r), uy(r, s.world_height() - r),
      ut(0.0, kTwoPi);
  return {ux(rng), uy(rng), ut(rng)};
}

inline bool Separated(const Pose& a, double ra, const Pose& b, double rb, double gap) {
  return std::hypot(a.x - b.x, a.y - b.y) > ra + rb + gap;
}

// Conservative placement: bounding circles separated by `gap`.
inline void PlaceApart(Scene& s, std::vector<Object*> objs, double margin, double gap,
                       std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (Object* o : objs) o->pose = SamplePose(s, *o, margin, rng);
    bool ok = true;
    for (size_t i = 0; i < objs.size() && ok; ++i) {
      for (size_t j = i + 1; j < objs.size() && ok; ++j) {
        ok = Separated(objs[i]->pose, objs[i]->shape.BoundingRadius(), objs[j]->pose,
                       objs[j]->shape.BoundingRadius(), gap);
      }
    }
    if (ok) return;
  }
  throw std::runtime_error("reset: could not place objects without collision after 1000 samples");
}

}  // namespace internal

// Deterministic scene for (task, seed).
inline Scene Reset(const TaskSpec& task, uint64_t seed) {
  Scene s;
  s.task = task;
  s.seed = seed;
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0x5EED);
  const double margin = 0.01, gap = 0.01;
  if (task.name == "block-insertion") {
    s.objects = {internal::MakeLBlock(), internal::MakeLFixture()};
    internal::PlaceApart(s, {&s.objects[0], &s.objects[1]}, margin, gap, rng);
    s.target = s.objects[1].pose;
  } else if (task.name == "place-disk-in-ring") {
    Object disk;
    disk.name = "disk";
    disk.shape.solids = {CirclePolygon(0.02)};
    disk.height = 0.03;
    disk.symmetry = 0.0;
    disk.grasp_period = 0.0;
    Object ring;
    ring.name = "ring";
    ring.shape.solids = {CirclePolygon(0.036)};
    ring.shape.holes = {CirclePolygon(0.025)};
    ring.height = 0.015;
    ring.role = Role::kFixture;
    s.objects = {disk, ring};
    internal::PlaceApart(s, {&s.objects[0], &s.objects[1]}, margin, gap, rng);
    s.target = {s.objects[1].pose.x, s.objects[1].pose.y, s.objects[0].pose.theta};
  } else if (task.name == "align-corner") {
    std::uniform_real_distribution<double> uw(0.04, 0.06), uh(0.02, 0.03);
    const double w = uw(rng), h = uh(rng);
    Object rect;
    rect.name = "rectangle";
    rect.shape.solids = {RectanglePolygon(w, h)};
    rect.height = 0.03;
    rect.symmetry = std::numbers::pi;
    Object marker;
    marker.name = "corner-marker";
    // The marker frame sits at the corner; the rectangle's target center is
    // (w/2, h/2) in that frame.
    marker.shape.solids = {CornerMarkerPolygon(0.006, 0.05)};
    marker.height = 0.005;
    marker.role = Role::kGoalMarker;
    s.objects = {rect, marker};
    // Place the marker by the pose of a virtual object covering marker and
    // target footprint, so the target area is free and inside the workspace.
    Object footprint = marker;
    footprint.shape.solids.push_back(RectanglePolygon(2 * w, 2 * h));
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) {
        throw std::runtime_error("reset: could not place objects after 1000 samples");
      }
      s.objects[0].pose = internal::SamplePose(s, rect, margin, rng);
      footprint.pose = internal::SamplePose(s, footprint, margin, rng);
      if (internal::Separated(s.objects[0].pose, rect.shape.BoundingRadius(), footprint.pose,
                              footprint.shape.BoundingRadius(), gap)) {
        break;
      }
    }
    s.objects[1].pose = footprint.pose;
    const Vec2 c = s.objects[1].pose.ToWorld({w / 2, h / 2});
    s.target = {c.x, c.y, s.objects[1].pose.theta};
  } else if (task.name == "goal-insertion") {
    s.objects = {internal::MakeLBlock()};
    Object ghost = s.objects[0];
    internal::PlaceApart(s, {&s.objects[0], &ghost}, margin, gap, rng);
    s.target = ghost.pose;
  } else {
    throw std::invalid_argument("unknown task '" + task.name + "'");
  }
  s.target_object = 0;
  s.rng.seed(rng());
  return s;
}

namespace internal {

inline FeatureField Render(const Scene& s, bool goal_view) {
  FeatureField f = FeatureField::Scalar(1, s.height, s.width, s.pixel_pitch);
  for (size_t k = 0; k < s.objects.size(); ++k) {
    Object o = s.objects[k];
    if (goal_view) {
      if (static_cast<int>(k) != s.target_object) continue;
      o.pose = s.target;
    }
    const double r = o.shape.BoundingRadius() + s.pixel_pitch;
    const double v = std::min(1.0, o.height / kMaxDepth);
    for (int row = 0; row < s.height; ++row) {
      for (int col = 0; col < s.width; ++col) {
        const Vec2 p = s.PixelCenter(row, col);
        if (std::abs(p.x - o.pose.x) > r || std::abs(p.y - o.pose.y) > r) continue;
        if (o.shape.Contains(o.pose.ToLocal(p))) f.at(0, row, col) = std::max(f.at(0, row, col), v);
      }
    }
  }
  return f;
}

}  // namespace internal

// Orthographic top-down depth: per-pixel max object height over kMaxDepth.
inline FeatureField RenderDepth(const Scene& s) { return internal::Render(s, false); }

// The target object alone at its goal pose.
inline FeatureField RenderGoal(const Scene& s) { return internal::Render(s, true); }

// Model input: o_t, or o_t stacked with o_g for goal-conditioned tasks.
inline FeatureField Observe(const Scene& s) {
  const FeatureField o = RenderDepth(s);
  return s.task.goal_conditioned() ? StackChannels(o, RenderGoal(s)) : o;
}

// Pixel mask of one object (for tests and oracle checks).
inline std::vector<uint8_t> ObjectMask(const Scene& s, int k) {
  std::vector<uint8_t> m(static_cast<size_t>(s.height) * s.width, 0);
  const Object& o = s.objects[k];
  for (int row = 0; row < s.height; ++row) {
    for (int col = 0; col < s.width; ++col) {
      m[row * s.width + col] = o.shape.Contains(o.pose.ToLocal(s.PixelCenter(row, col)));
    }
  }
  return m;
}

// Pose error of the target object, rotation taken modulo its symmetry.
inline double Success(const Scene& s) {
  const Object& o = s.objects[s.target_object];
  const double dt = std::hypot(o.pose.x - s.target.x, o.pose.y - s.target.y);
  const double dr = internal::AngleDistance(o.pose.theta, s.target.theta, o.symmetry);
  const bool done = dt <= s.task.tau && dr <= s.task.omega;
  return done ? 1.0 : 0.0;
}

// Executes one pick-and-place. A pick on a pickable object's mask with the
// gripper within tolerance of its grasp axis moves the object rigidly so the
// pick point lands on the place point, rotated by place_theta. Returns the
// per-step reward (successful placements / required placements).
inline double Step(Scene& s, const PickPlaceAction& a) {
  ++s.steps;
  if (!s.InBounds(a.pick_u, a.pick_v) || !s.InBounds(a.place_u, a.place_v)) return 0.0;
  const Vec2 p = s.PixelCenter(a.pick_u, a.pick_v);
  const Vec2 q = s.PixelCenter(a.place_u, a.place_v);
  int picked = -1;
  for (size_t k = 0; k < s.objects.size(); ++k) {
    const Object& o = s.objects[k];
    if (o.role != Role::kPickable || !o.shape.Contains(o.pose.ToLocal(p))) continue;
    const double axis = o.pose.theta + o.grasp_axis;
    if (internal::AngleDistance(a.pick_theta, axis, o.grasp_period) > s.task.grasp_tolerance) {
      continue;
    }
    picked = static_cast<int>(k);
    break;
  }
  if (picked < 0) return 0.0;
  Object& o = s.objects[picked];
  const double before = Success(s);
  const Vec2 c = q + Rotate(o.pose.position() - p, a.place_theta);
  o.pose = {c.x, c.y, std::fmod(o.pose.theta + a.place_theta, kTwoPi)};
  const double after = Success(s);
  if (picked == s.target_object && after > before) {
    ++s.placements_done;
    return 1.0 / s.required_placements;
  }
  return 0.0;
}

inline double WrapTwoPi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

// Scripted expert: grasp near the object's grasp point (jitter from the scene
// rng, within the mask) and place so the object lands on its target pose.
inline PickPlaceAction Oracle(const Scene& s) {
  const Object& o = s.objects[s.target_object];
  std::mt19937_64 rng = s.rng;
  std::uniform_real_distribution<double> jitter(-0.5 * s.pixel_pitch, 0.5 * s.pixel_pitch);
  PickPlaceAction a;
  bool found = false;
  for (int attempt = 0; attempt < 20 && !found; ++attempt) {
    const Vec2 local = o.grasp_point + Vec2{jitter(rng), jitter(rng)};
    s.WorldToPixel(o.pose.ToWorld(local), &a.pick_u, &a.pick_v);
    found = s.InBounds(a.pick_u, a.pick_v) &&
            o.shape.Contains(o.pose.ToLocal(s.PixelCenter(a.pick_u, a.pick_v)));
  }
  if (!found) {
    throw std::runtime_error("oracle: no valid grasp for seed " + std::to_string(s.seed));
  }
  a.pick_theta = std::fmod(WrapTwoPi(o.pose.theta + o.grasp_axis), std::numbers::pi);
  // Rotation that brings the object onto the target, smallest among its
  // symmetric equivalents.
  double delta = WrapTwoPi(s.target.theta - o.pose.theta);
  if (o.symmetry == 0.0) {
    delta = 0.0;
  } else {
    delta = std::fmod(delta, o.symmetry);
  }
  a.place_theta = delta;
  const Vec2 p = s.PixelCenter(a.pick_u, a.pick_v);
  const Vec2 q = s.target.position() - Rotate(o.pose.position() - p, delta);
  s.WorldToPixel(q, &a.place_u, &a.place_v);
  if (!s.InBounds(a.place_u, a.place_v)) {
    throw std::runtime_error("oracle: place point outside workspace for seed " +
                             std::to_string(s.seed));
  }
  return a;
}

// Rotates the whole scene by quarter turns about the workspace center.
inline Scene RotateScene(const Scene& s, int quarter_turns) {
  if (s.height != s.width) throw std::invalid_argument("scene rotation needs a square workspace");
  Scene out = s;
  double c = 1, sn = 0;
  GroupElement::Cyclic(4, quarter_turns).CosSin(1, &c, &sn);
  const Vec2 center{s.world_width() / 2, s.world_height() / 2};
  const double turn = kTwoPi * internal::PositiveMod(quarter_turns, 4) / 4;
  auto rotate_pose = [&](const Pose& p) {
    const Vec2 v = center + Rotate(p.position() - center, c, sn);
    return Pose{v.x, v.y, WrapTwoPi(p.theta + turn)};
  };
  for (auto& o : out.objects) o.pose = rotate_pose(o.pose);
  out.target = rotate_pose(s.target);
  return out;
}

}  // namespace eqtp

#endif  // EQTP_BENCH_HPP_
