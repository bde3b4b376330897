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

#include "eqtp/correlate.hpp"

#include <random>

#include <gtest/gtest.h>

namespace eqtp {
namespace {

KernelTensor RandomKernel(int out, int in, int k, std::mt19937& rng) {
  KernelTensor t(out, in, k);
  std::normal_distribution<double> n;
  for (double& v : t.w) v = n(rng);
  return t;
}

FeatureField RandomScalarField(int c, int h, int w, std::mt19937& rng) {
  FeatureField f = FeatureField::Scalar(c, h, w);
  std::normal_distribution<double> n;
  for (double& v : f.data()) v = n(rng);
  return f;
}

// (K * f)(v) = sum_w f(v + w) K(w) with w centered on the kernel.
FeatureField LiteralCorrelation(const KernelTensor& k, const FeatureField& f) {
  FeatureField out = FeatureField::Scalar(k.out_channels, f.height(), f.width());
  const int c = k.center();
  for (int o = 0; o < k.out_channels; ++o) {
    for (int r = 0; r < f.height(); ++r) {
      for (int col = 0; col < f.width(); ++col) {
        double acc = 0;
        for (int i = 0; i < k.in_channels; ++i) {
          for (int dr = -c; dr <= c; ++dr) {
            for (int dc = -c; dc <= c; ++dc) {
              const int sr = r + dr, sc = col + dc;
              if (sr < 0 || sr >= f.height() || sc < 0 || sc >= f.width()) continue;
              acc += f.at(i, sr, sc) * k.at(o, i, dr + c, dc + c);
            }
          }
        }
        out.at(o, r, col) = acc;
      }
    }
  }
  return out;
}

KernelTensor RotateKernel(const KernelTensor& k, const GroupElement& g) {
  FeatureField as_field = FeatureField::Scalar(k.out_channels * k.in_channels, k.size, k.size);
  as_field.data() = k.w;
  KernelTensor out = k;
  out.w = RotateBase(as_field, g, Interp::kNearest).data();
  return out;
}

TEST(CrossCorrelateTest, MatchesLiteralSum) {
  std::mt19937 rng(1);
  for (int k : {1, 3, 5}) {
    const KernelTensor kern = RandomKernel(2, 3, k, rng);
    const FeatureField f = RandomScalarField(3, 7, 9, rng);
    EXPECT_LE(MaxAbsDiff(CrossCorrelate(kern, f), LiteralCorrelation(kern, f)), 1e-12);
  }
}

TEST(CrossCorrelateTest, IdentityKernel) {
  std::mt19937 rng(2);
  const FeatureField f = RandomScalarField(1, 6, 6, rng);
  KernelTensor id(1, 1, 1);
  id.w[0] = 1.0;
  EXPECT_EQ(CrossCorrelate(id, f).data(), f.data());
}

TEST(CrossCorrelateTest, ValidModeShrinks) {
  std::mt19937 rng(3);
  const KernelTensor kern = RandomKernel(1, 1, 3, rng);
  const FeatureField f = RandomScalarField(1, 8, 6, rng);
  const FeatureField same = CrossCorrelate(kern, f);
  const FeatureField valid = CrossCorrelate(kern, f, 1, PadMode::kValid);
  ASSERT_EQ(valid.height(), 6);
  ASSERT_EQ(valid.width(), 4);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(valid.at(0, r, c), same.at(0, r + 1, c + 1), 1e-12);
  }
}

TEST(CrossCorrelateTest, Strided) {
  std::mt19937 rng(4);
  const KernelTensor kern = RandomKernel(1, 1, 3, rng);
  const FeatureField f = RandomScalarField(1, 7, 7, rng);
  const FeatureField full = CrossCorrelate(kern, f);
  const FeatureField s2 = CrossCorrelate(kern, f, 2);
  ASSERT_EQ(s2.height(), 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) EXPECT_EQ(s2.at(0, r, c), full.at(0, 2 * r, 2 * c));
  }
}

TEST(CrossCorrelateTest, ChannelMismatchThrows) {
  EXPECT_THROW(CrossCorrelate(KernelTensor(1, 2, 3), FeatureField::Scalar(3, 5, 5)),
               std::invalid_argument);
}

TEST(CrossCorrelateTest, LinearInBothArguments) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const KernelTensor k1 = RandomKernel(2, 2, 3, rng), k2 = RandomKernel(2, 2, 3, rng);
    const FeatureField f1 = RandomScalarField(2, 6, 6, rng), f2 = RandomScalarField(2, 6, 6, rng);
    KernelTensor ksum = k1;
    for (size_t i = 0; i < ksum.w.size(); ++i) ksum.w[i] = 2 * k1.w[i] - 3 * k2.w[i];
    FeatureField fsum = f1;
    for (size_t i = 0; i < fsum.data().size(); ++i) fsum.data()[i] = f1.data()[i] + 0.5 * f2.data()[i];
    const FeatureField a = CrossCorrelate(ksum, f1);
    const FeatureField b1 = CrossCorrelate(k1, f1), b2 = CrossCorrelate(k2, f1);
    for (size_t i = 0; i < a.data().size(); ++i) {
      ASSERT_NEAR(a.data()[i], 2 * b1.data()[i] - 3 * b2.data()[i], 1e-12);
    }
    const FeatureField c = CrossCorrelate(k1, fsum);
    const FeatureField d2 = CrossCorrelate(k1, f2);
    for (size_t i = 0; i < c.data().size(); ++i) {
      ASSERT_NEAR(c.data()[i], b1.data()[i] + 0.5 * d2.data()[i], 1e-12);
    }
  }
}

TEST(CrossCorrelateTest, RotatingKernelAndFieldRotatesOutput) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const KernelTensor k = RandomKernel(1, 1, 5, rng);
    const FeatureField f = RandomScalarField(1, 11, 11, rng);
    for (const GroupElement& g : Elements(4)) {
      const FeatureField lhs = RotateBase(CrossCorrelate(k, f), g, Interp::kNearest);
      const FeatureField rhs =
          CrossCorrelate(RotateKernel(k, g), RotateBase(f, g, Interp::kNearest));
      ASSERT_LE(MaxAbsDiff(lhs, rhs), 1e-10);
    }
  }
}

TEST(CrossCorrelateTest, PermutingDiagonalSlotsPermutesOutputs) {
  std::mt19937 rng(7);
  const int n = 4;
  for (int trial = 0; trial < 50; ++trial) {
    const FeatureField x = RandomScalarField(1, 6, 6, rng);
    FeatureField dup = FeatureField::Scalar(n, 6, 6);
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
      for (size_t p = 0; p < a.size(); ++p) ASSERT_LE(std::abs(a[p] - b[p]), 1e-10);
    }
  }
}

}  // namespace
}  // namespace eqtp
