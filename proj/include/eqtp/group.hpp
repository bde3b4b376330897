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

// Cyclic rotation groups C_n, the continuous rotation group SO(2), and the
// five representation families used for fiber transformations.

#ifndef EQTP_GROUP_HPP_
#define EQTP_GROUP_HPP_

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eqtp {

using Matrix = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace internal {

inline int PositiveMod(long long a, long long n) {
  long long r = a % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

// cos/sin of 2*pi*num/den, exact at quarter turns.
inline void ExactCosSin(long long num, long long den, double* c, double* s) {
  const int i = PositiveMod(num, den);
  if ((4LL * i) % den == 0) {
    static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
    const int quarter = static_cast<int>(4LL * i / den);
    *c = kCos[quarter];
    *s = kSin[quarter];
    return;
  }
  const double theta = kTwoPi * static_cast<double>(i) / static_cast<double>(den);
  *c = std::cos(theta);
  *s = std::sin(theta);
}

inline double WrapAngle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace internal

// A rotation in C_n (order n > 0, stored as the exact index i of 2*pi*i/n)
// or in SO(2) (order 0, stored as an angle in [0, 2*pi)).
class GroupElement {
 public:
  GroupElement() = default;

  static GroupElement Cyclic(int order, long long index) {
    if (order <= 0) throw std::invalid_argument("cyclic group order must be positive");
    GroupElement g;
    g.order_ = order;
    g.index_ = internal::PositiveMod(index, order);
    return g;
  }

  static GroupElement Continuous(double angle) {
    if (!std::isfinite(angle)) throw std::invalid_argument("rotation angle must be finite");
    GroupElement g;
    g.order_ = 0;
    g.angle_ = internal::WrapAngle(angle);
    return g;
  }

  static GroupElement Identity(int order) {
    return order == 0 ? Continuous(0.0) : Cyclic(order, 0);
  }

  int order() const { return order_; }
  int index() const { return index_; }
  bool is_continuous() const { return order_ == 0; }
  bool is_identity() const { return is_continuous() ? angle_ == 0.0 : index_ == 0; }

  double angle() const {
    if (is_continuous()) return angle_;
    return kTwoPi * static_cast<double>(index_) / static_cast<double>(order_);
  }

  // Exact (cos, sin) of the rotation angle scaled by an integer frequency.
  void CosSin(long long frequency, double* c, double* s) const {
    if (is_continuous()) {
      const double a = static_cast<double>(frequency) * angle_;
      *c = std::cos(a);
      *s = std::sin(a);
      return;
    }
    internal::ExactCosSin(frequency * index_, order_, c, s);
  }

  GroupElement Inverse() const {
    return is_continuous() ? Continuous(-angle_) : Cyclic(order_, -index_);
  }

  // The same rotation viewed as an element of C_m; requires order() | m.
  GroupElement EmbedInto(int m) const {
    if (is_continuous() || m <= 0 || m % order_ != 0) {
      throw std::invalid_argument("cannot embed C_" + std::to_string(order_) + " into C_" +
                                  std::to_string(m));
    }
    return Cyclic(m, static_cast<long long>(index_) * (m / order_));
  }

  // Number of quarter turns if this is a multiple of pi/2, else -1.
  int QuarterTurns() const {
    if (is_continuous()) {
      for (int q = 0; q < 4; ++q) {
        if (angle_ == q * std::numbers::pi / 2) return q;
      }
      return -1;
    }
    if ((4LL * index_) % order_ != 0) return -1;
    return static_cast<int>(4LL * index_ / order_);
  }

  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    if (a.order_ != b.order_) return false;
    return a.is_continuous() ? a.angle_ == b.angle_ : a.index_ == b.index_;
  }

  std::string ToString() const {
    if (is_continuous()) return "SO2(" + std::to_string(angle_) + ")";
    return "C" + std::to_string(order_) + "[" + std::to_string(index_) + "]";
  }

 private:
  int order_ = 1;
  int index_ = 0;
  double angle_ = 0.0;
};

inline GroupElement Compose(const GroupElement& g, const GroupElement& h) {
  if (g.order() != h.order()) {
    throw std::invalid_argument("compose: group orders differ (" + g.ToString() + ", " +
                                h.ToString() + ")");
  }
  if (g.is_continuous()) return GroupElement::Continuous(g.angle() + h.angle());
  return GroupElement::Cyclic(g.order(), static_cast<long long>(g.index()) + h.index());
}

inline GroupElement Inverse(const GroupElement& g) { return g.Inverse(); }

// All elements of C_n in index order.
inline std::vector<GroupElement> Elements(int order) {
  std::vector<GroupElement> out;
  out.reserve(order);
  for (int i = 0; i < order; ++i) out.push_back(GroupElement::Cyclic(order, i));
  return out;
}

enum class RepKind { kTrivial, kStandard, kRegular, kQuotient, kIrrep };

// A representation of C_n (group_order n > 0) or SO(2) (group_order 0).
// `param` is k for quotient(C_n / C_k) and the frequency m for irrep(m).
class Representation {
 public:
  Representation() = default;

  static Representation Trivial(int group_order) { return {RepKind::kTrivial, group_order, 0}; }
  static Representation Standard(int group_order) { return {RepKind::kStandard, group_order, 1}; }
  static Representation Regular(int group_order) {
    if (group_order <= 0) throw std::invalid_argument("regular representation needs a finite C_n");
    return {RepKind::kRegular, group_order, 0};
  }
  static Representation Quotient(int group_order, int k) {
    if (group_order <= 0) throw std::invalid_argument("quotient representation needs a finite C_n");
    if (k <= 0 || group_order % k != 0) {
      throw std::invalid_argument("quotient C_" + std::to_string(group_order) + "/C_" +
                                  std::to_string(k) + ": k must divide n");
    }
    return {RepKind::kQuotient, group_order, k};
  }
  static Representation Irrep(int group_order, int frequency) {
    if (frequency < 0) throw std::invalid_argument("irrep frequency must be non-negative");
    return {RepKind::kIrrep, group_order, frequency};
  }

  RepKind kind() const { return kind_; }
  int group_order() const { return group_order_; }
  int param() const { return param_; }

  int dim() const {
    switch (kind_) {
      case RepKind::kTrivial: return 1;
      case RepKind::kStandard: return 2;
      case RepKind::kRegular: return group_order_;
      case RepKind::kQuotient: return group_order_ / param_;
      case RepKind::kIrrep: return param_ == 0 ? 1 : 2;
    }
    return 0;
  }

  // True if the matrices are permutations (regular, quotient, trivial).
  bool is_permutation() const {
    return kind_ == RepKind::kTrivial || kind_ == RepKind::kRegular ||
           kind_ == RepKind::kQuotient || (kind_ == RepKind::kIrrep && param_ == 0);
  }

  std::string ToString() const {
    const std::string n = std::to_string(group_order_);
    switch (kind_) {
      case RepKind::kTrivial: return "trivial";
      case RepKind::kStandard: return "standard";
      case RepKind::kRegular: return "regular(" + n + ")";
      case RepKind::kQuotient: return "quotient(" + n + "/" + std::to_string(param_) + ")";
      case RepKind::kIrrep: return "irrep(" + std::to_string(param_) + ")";
    }
    return "?";
  }

  // Parses the ToString() form, with `n` used when the text omits it.
  static Representation Parse(const std::string& text, int n) {
    if (text == "trivial") return Trivial(n);
    if (text == "standard") return Standard(n);
    auto inner = [&](const std::string& prefix) -> std::string {
      if (text.rfind(prefix + "(", 0) != 0 || text.back() != ')') return {};
      return text.substr(prefix.size() + 1, text.size() - prefix.size() - 2);
    };
    if (auto s = inner("regular"); !s.empty()) return Regular(std::stoi(s));
    if (auto s = inner("irrep"); !s.empty()) return Irrep(n, std::stoi(s));
    if (auto s = inner("quotient"); !s.empty()) {
      const auto slash = s.find('/');
      if (slash == std::string::npos) throw std::invalid_argument("bad quotient: " + text);
      return Quotient(std::stoi(s.substr(0, slash)), std::stoi(s.substr(slash + 1)));
    }
    throw std::invalid_argument("unknown representation: " + text);
  }

  friend bool operator==(const Representation&, const Representation&) = default;

 private:
  Representation(RepKind kind, int order, int param)
      : kind_(kind), group_order_(order), param_(param) {
    if (order < 0) throw std::invalid_argument("group order must be >= 0");
  }

  RepKind kind_ = RepKind::kTrivial;
  int group_order_ = 1;
  int param_ = 0;
};

// Index of the source coordinate that lands in slot j under a cyclic shift by
// i on a length-q fiber: (rho(g) x)_j = x_{j - i mod q}. With i = 1 this is
// (x_0, ..., x_{q-1}) -> (x_{q-1}, x_0, ..., x_{q-2}).
inline int ShiftSource(int j, long long i, int q) { return internal::PositiveMod(j - i, q); }

// Index of the rotation within the representation's own group, embedding
// subgroup elements when needed.
inline long long RepIndex(const Representation& rep, const GroupElement& g) {
  if (g.is_continuous()) {
    throw std::invalid_argument(rep.ToString() + " is undefined for continuous SO(2) rotations");
  }
  if (rep.group_order() == g.order()) return g.index();
  return g.EmbedInto(rep.group_order()).index();
}

inline Matrix RepMatrix(const Representation& rep, const GroupElement& g) {
  const int d = rep.dim();
  Matrix m = Matrix::Zero(d, d);
  switch (rep.kind()) {
    case RepKind::kTrivial:
      m(0, 0) = 1.0;
      return m;
    case RepKind::kStandard:
    case RepKind::kIrrep: {
      const int freq = rep.kind() == RepKind::kStandard ? 1 : rep.param();
      if (freq == 0) {
        m(0, 0) = 1.0;
        return m;
      }
      double c = 0, s = 0;
      g.CosSin(freq, &c, &s);
      m << c, -s, s, c;
      return m;
    }
    case RepKind::kRegular:
    case RepKind::kQuotient: {
      const long long i = RepIndex(rep, g);
      for (int j = 0; j < d; ++j) m(j, ShiftSource(j, i, d)) = 1.0;
      return m;
    }
  }
  return m;
}

// Discretized distribution over orientations with `period` 2*pi (full circle)
// or pi (bilaterally symmetric gripper). Bin j sits at angle j * period / m.
struct OrientationDistribution {
  std::vector<double> values;
  double period = kTwoPi;

  double bin_width() const { return period / static_cast<double>(values.size()); }
};

class IncommensurateAngleError : public std::invalid_argument {
 public:
  IncommensurateAngleError(double requested, double nearest)
      : std::invalid_argument("rotation by " + std::to_string(requested) +
                              " rad is not a whole number of bins; nearest representable " +
                              std::to_string(nearest)),
        requested_(requested),
        nearest_(nearest) {}

  double requested_angle() const { return requested_; }
  double nearest_angle() const { return nearest_; }

 private:
  double requested_;
  double nearest_;
};

// Number of bins a rotation by g moves an orientation distribution, reduced
// modulo the bin count (so rotations by the period leave it unchanged).
inline int OrientationShift(const OrientationDistribution& d, const GroupElement& g) {
  const int m = static_cast<int>(d.values.size());
  if (m == 0) throw std::invalid_argument("empty orientation distribution");
  double steps = 0.0;
  if (g.is_continuous()) {
    steps = g.angle() * m / d.period;
  } else {
    steps = (kTwoPi / d.period) * static_cast<double>(g.index()) * m / g.order();
  }
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9) {
    throw IncommensurateAngleError(g.angle(), rounded * d.period / m);
  }
  return internal::PositiveMod(static_cast<long long>(rounded), m);
}

// Moves the mass at bin j to bin j + shift(g).
inline OrientationDistribution ShiftOrientation(const OrientationDistribution& d,
                                                const GroupElement& g) {
  const int shift = OrientationShift(d, g);
  const int m = static_cast<int>(d.values.size());
  OrientationDistribution out{std::vector<double>(m), d.period};
  for (int j = 0; j < m; ++j) out.values[j] = d.values[ShiftSource(j, shift, m)];
  return out;
}

}  // namespace eqtp

#endif  // EQTP_GROUP_HPP_
