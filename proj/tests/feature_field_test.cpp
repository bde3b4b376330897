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

#include "eqtp/feature_field.hpp"

#include <random>

#include <gtest/gtest.h>

namespace eqtp {
namespace {

FeatureField RandomField(Representation rep, int copies, int h, int w, std::mt19937& rng) {
  FeatureField f(rep, copies, h, w);
  std::normal_distribution<double> n;
  for (double& v : f.data()) v = n(rng);
  return f;
}

// Counterclockwise quarter turn of a square grid by index arithmetic.
double QuarterTurnOracle(const FeatureField& f, int c, int r, int col) {
  return f.at(c, col, f.width() - 1 - r);
}

TEST(TransformTest, TwoByTwoQuarterTurn) {
  FeatureField f = FeatureField::Scalar(1, 2, 2);
  f.at(0, 0, 0) = 1;  // a
  f.at(0, 0, 1) = 2;  // b
  f.at(0, 1, 0) = 3;  // c
  f.at(0, 1, 1) = 4;  // d
  for (Interp interp : {Interp::kNearest, Interp::kBilinear}) {
    const FeatureField out = Transform(f, GroupElement::Cyclic(4, 1), interp);
    EXPECT_EQ(out.at(0, 0, 0), 2);
    EXPECT_EQ(out.at(0, 0, 1), 4);
    EXPECT_EQ(out.at(0, 1, 0), 1);
    EXPECT_EQ(out.at(0, 1, 1), 3);
  }
}

TEST(TransformTest, IdentityIsExact) {
  std::mt19937 rng(1);
  const FeatureField f = RandomField(Representation::Regular(8), 2, 9, 7, rng);
  EXPECT_EQ(Transform(f, GroupElement::Identity(8)).data(), f.data());
}

TEST(TransformTest, RegularFiberQuarterTurnMatchesComposedOracle) {
  std::mt19937 rng(2);
  const FeatureField f = RandomField(Representation::Regular(4), 3, 8, 8, rng);
  const FeatureField out = Transform(f, GroupElement::Cyclic(4, 1), Interp::kBilinear);
  for (int copy = 0; copy < 3; ++copy) {
    for (int j = 0; j < 4; ++j) {
      const int src = copy * 4 + (j + 3) % 4;
      for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
          ASSERT_NEAR(out.at(copy * 4 + j, r, c), QuarterTurnOracle(f, src, r, c), 1e-12);
        }
      }
    }
  }
}

TEST(TransformTest, QuarterTurnsInvertExactly) {
  std::mt19937 rng(3);
  for (int size : {7, 8}) {
    const FeatureField f = RandomField(Representation::Standard(4), 2, size, size, rng);
    for (const GroupElement& g : Elements(4)) {
      for (Interp interp : {Interp::kNearest, Interp::kBilinear}) {
        const FeatureField back = Transform(Transform(f, g, interp), g.Inverse(), interp);
        EXPECT_LE(MaxAbsDiff(back, f), 1e-12);
      }
    }
  }
}

TEST(TransformTest, QuarterTurnCompositionExact) {
  std::mt19937 rng(4);
  const FeatureField f = RandomField(Representation::Regular(4), 1, 10, 10, rng);
  for (const GroupElement& g : Elements(4)) {
    for (const GroupElement& h : Elements(4)) {
      const FeatureField a = Transform(f, Compose(g, h));
      const FeatureField b = Transform(Transform(f, h), g);
      EXPECT_LE(MaxAbsDiff(a, b), 1e-12);
    }
  }
}

TEST(TransformTest, FineRotationCompositionApproximate) {
  std::mt19937 rng(5);
  for (int n : {8, 12}) {
    // Blob well inside the frame so no mass is rotated out of it. Bilinear
    // resampling attenuates high frequencies; at sigma 1.5 the round trip
    // alone loses about 10%, so the bound is checked on smoother fields.
    FeatureField f = FeatureField::Scalar(1, 64, 64);
    std::normal_distribution<double> nd;
    for (int r = 16; r < 48; ++r) {
      for (int c = 16; c < 48; ++c) f.at(0, r, c) = nd(rng);
    }
    f = GaussianSmooth(f, 4.0);
    for (int i = 1; i < n; i += 2) {
      const GroupElement g = GroupElement::Cyclic(n, i), h = GroupElement::Cyclic(n, 1);
      const FeatureField a = Transform(f, Compose(g, h));
      const FeatureField b = Transform(Transform(f, h), g);
      EXPECT_LE(RelativeL2(b, a), 0.02) << "n=" << n << " i=" << i;
    }
  }
}

TEST(LiftTest, SingleCopy) {
  std::mt19937 rng(6);
  const FeatureField c = RandomField(Representation::Trivial(1), 1, 5, 5, rng);
  const FeatureField l = Lift(c, 1);
  EXPECT_EQ(l.channels(), 1);
  EXPECT_EQ(l.data(), c.data());
}

TEST(LiftTest, OneHotVisitsAxisPositions) {
  const int r = 3, n = 2 * r + 1;
  FeatureField c = FeatureField::Scalar(1, n, n);
  c.at(0, r, 0) = 1.0;  // left of center
  const FeatureField l = Lift(c, 4, Interp::kNearest);
  // Counterclockwise: left -> bottom -> right -> top.
  const int expected[4][2] = {{r, 0}, {n - 1, r}, {r, n - 1}, {0, r}};
  for (int i = 0; i < 4; ++i) {
    double total = 0;
    for (double v : l.plane(i)) total += v;
    EXPECT_EQ(total, 1.0);
    EXPECT_EQ(l.at(i, expected[i][0], expected[i][1]), 1.0) << "copy " << i;
  }
}

TEST(LiftTest, RejectsBadInput) {
  EXPECT_THROW(Lift(FeatureField::Scalar(1, 3, 3), 0), std::invalid_argument);
  EXPECT_THROW(Lift(FeatureField(Representation::Regular(4), 1, 3, 3), 4),
               std::invalid_argument);
}

TEST(LiftTest, RotatingInputShiftsRegularFiber) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const FeatureField c = RandomField(Representation::Trivial(1), 2, 9, 9, rng);
    for (const GroupElement& g : Elements(4)) {
      const FeatureField lhs = Lift(Transform(c, g, Interp::kNearest), 4, Interp::kNearest);
      const FeatureField rhs = ActOnFiber(Lift(c, 4, Interp::kNearest), g.Inverse());
      ASSERT_LE(MaxAbsDiff(lhs, rhs), 1e-12);
    }
  }
}

TEST(CropTest, FullCropAtCenterIsIdentity) {
  std::mt19937 rng(8);
  const FeatureField f = RandomField(Representation::Trivial(1), 1, 9, 9, rng);
  const FeatureField c = Crop(f, {4, 4, 9, 9, 0.0});
  EXPECT_EQ(c.data(), f.data());
}

TEST(CropTest, OutsideIsPad) {
  std::mt19937 rng(9);
  const FeatureField f = RandomField(Representation::Trivial(1), 1, 9, 9, rng);
  const FeatureField c = Crop(f, {100, -50, 5, 3, 0.25});
  for (double v : c.data()) EXPECT_EQ(v, 0.25);
}

TEST(CropTest, HotPixelLandsAtPatchCenter) {
  FeatureField f = FeatureField::Scalar(1, 20, 30);
  f.at(0, 13, 4) = 1.0;
  const FeatureField c = Crop(f, {13, 4, 7, 9, 0.0});
  EXPECT_EQ(c.at(0, 3, 4), 1.0);
  EXPECT_EQ(c.origin_row(), 3.0);
  EXPECT_EQ(c.origin_col(), 4.0);
}

TEST(PadTest, ZeroBorderIsIdentity) {
  std::mt19937 rng(10);
  const FeatureField f = RandomField(Representation::Trivial(1), 2, 4, 6, rng);
  EXPECT_EQ(Pad(f, 0).data(), f.data());
}

TEST(PadTest, ShapeAndCenter) {
  FeatureField f = FeatureField::Scalar(1, 5, 5);
  f.at(0, 2, 2) = 1.0;
  const FeatureField p = Pad(f, 3);
  EXPECT_EQ(p.height(), 11);
  EXPECT_EQ(p.width(), 11);
  EXPECT_EQ(p.at(0, 5, 5), 1.0);
  EXPECT_EQ(p.origin_row(), 5.0);
}

TEST(FieldTest, FiniteCheck) {
  FeatureField f = FeatureField::Scalar(1, 2, 2);
  EXPECT_TRUE(f.AllFinite());
  f.at(0, 1, 1) = std::nan("");
  EXPECT_FALSE(f.AllFinite());
  EXPECT_THROW(f.CheckFinite("test"), std::invalid_argument);
}

}  // namespace
}  // namespace eqtp
