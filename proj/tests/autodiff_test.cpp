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

#include "eqtp/autodiff.hpp"

#include <random>

#include <gtest/gtest.h>

#include "eqtp/gradcheck.hpp"
#include "eqtp/optim.hpp"

namespace eqtp {
namespace {

using ad::Tensor;
using TD = Tensor<double>;

TD RandomParam(ad::Shape shape, std::mt19937& rng, double scale = 1.0) {
  std::vector<double> v(ad::NumElements(shape));
  for (double& x : v) x = scale * std::normal_distribution<double>()(rng);
  return TD::Param(std::move(shape), std::move(v));
}

TD RandomConstant(ad::Shape shape, std::mt19937& rng) {
  std::vector<double> v(ad::NumElements(shape));
  for (double& x : v) x = std::normal_distribution<double>()(rng);
  return TD::Constant(std::move(shape), std::move(v));
}

// Scalar probe sum(op(x) * r) with a fixed random r.
double CheckOp(std::vector<std::pair<std::string, TD>> inputs, const std::function<TD()>& op,
               std::mt19937& rng) {
  const TD probe_shape = op();
  const TD r = RandomConstant(probe_shape.shape(), rng);
  auto loss = [&] { return ad::Sum(ad::Mul(op(), r)); };
  GradCheckOptions opts;
  const GradCheckResult res = CheckGradients(inputs, loss, opts, rng);
  EXPECT_GT(res.checked, 0);
  return res.max_rel_error;
}

TEST(AutodiffTest, ReluValues) {
  const TD x = TD::Constant({2}, {-1.0, 2.0});
  const TD y = ad::Relu(x);
  EXPECT_EQ(y.data()[0], 0.0);
  EXPECT_EQ(y.data()[1], 2.0);
}

TEST(AutodiffTest, UniformLogitsCrossEntropy) {
  const TD z = TD::Constant({7}, std::vector<double>(7, 0.3));
  EXPECT_NEAR(ad::SoftmaxCrossEntropy(z, 0).item(), std::log(7.0), 1e-12);
}

TEST(AutodiffTest, ProductRule) {
  const TD x = TD::Param({1}, {3.0}), y = TD::Param({1}, {-2.5});
  ad::Backward(ad::Mul(x, y));
  EXPECT_EQ(x.grad()[0], -2.5);
  EXPECT_EQ(y.grad()[0], 3.0);
}

TEST(AutodiffTest, SumGradientIsOnes) {
  std::mt19937 rng(1);
  const TD x = RandomParam({2, 3, 4}, rng);
  ad::Backward(ad::Sum(x));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(AutodiffTest, SharedUseAccumulates) {
  const TD x = TD::Param({1}, {2.0});
  ad::Backward(ad::Add(ad::Mul(x, x), x));
  EXPECT_EQ(x.grad()[0], 5.0);
}

TEST(AutodiffTest, BackwardRejectsNonScalar) {
  const TD x = TD::Param({2}, {1.0, 2.0});
  EXPECT_THROW(ad::Backward(x), std::invalid_argument);
}

TEST(AutodiffTest, ShapeErrorsNameTheOp) {
  const TD a = TD::Constant({1, 2, 2}, std::vector<double>(4)), b = TD::Constant({1, 3, 2}, std::vector<double>(6));
  try {
    ad::Add(a, b);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("add"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[1,3,2]"), std::string::npos);
  }
}

TEST(GradientTest, Conv2dSmall) {
  std::mt19937 rng(2);
  const TD x = RandomParam({1, 5, 5}, rng), w = RandomParam({1, 1, 3, 3}, rng);
  EXPECT_LE(CheckOp({{"x", x}, {"w", w}}, [&] { return ad::Conv2d(x, w); }, rng), 1e-4);
}

TEST(GradientTest, Conv2dValidMultiChannel) {
  std::mt19937 rng(3);
  const TD x = RandomParam({3, 9, 8}, rng), w = RandomParam({2, 3, 5, 5}, rng);
  EXPECT_LE(CheckOp({{"x", x}, {"w", w}}, [&] { return ad::Conv2d(x, w, PadMode::kValid); }, rng),
            1e-4);
}

TEST(GradientTest, AddBias) {
  std::mt19937 rng(4);
  const TD x = RandomParam({3, 4, 4}, rng), b = RandomParam({3}, rng);
  EXPECT_LE(CheckOp({{"x", x}, {"b", b}}, [&] { return ad::AddBias(x, b); }, rng), 1e-4);
}

TEST(GradientTest, Relu) {
  std::mt19937 rng(5);
  const TD x = RandomParam({2, 6, 6}, rng);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::Relu(x); }, rng), 1e-4);
}

TEST(GradientTest, MaxPool2) {
  std::mt19937 rng(6);
  const TD x = RandomParam({2, 6, 8}, rng);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::MaxPool2(x); }, rng), 1e-4);
}

TEST(GradientTest, UpsampleBilinear2) {
  std::mt19937 rng(7);
  const TD x = RandomParam({2, 4, 5}, rng);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::UpsampleBilinear2(x); }, rng), 1e-4);
}

TEST(GradientTest, AddMulConcat) {
  std::mt19937 rng(8);
  const TD a = RandomParam({2, 3, 3}, rng), b = RandomParam({2, 3, 3}, rng), c = RandomParam({1, 3, 3}, rng);
  EXPECT_LE(CheckOp({{"a", a}, {"b", b}, {"c", c}},
                    [&] { return ad::ConcatChannels(ad::Mul(ad::Add(a, b), a), c); }, rng),
            1e-4);
}

TEST(GradientTest, SoftmaxCrossEntropy) {
  std::mt19937 rng(9);
  const TD z = RandomParam({4, 3, 3}, rng);
  GradCheckOptions opts;
  const auto res = CheckGradients({{"z", z}}, [&] { return ad::SoftmaxCrossEntropy(z, 17); }, opts, rng);
  EXPECT_LE(res.max_rel_error, 1e-4);
}

TEST(GradientTest, ResampleCropPadPool) {
  std::mt19937 rng(10);
  const TD x = RandomParam({2, 7, 7}, rng);
  auto rot = CachedRotation(7, 7, 3, 3, GroupElement::Cyclic(8, 1), Interp::kBilinear);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::Resample(x, rot); }, rng), 1e-4);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::Crop(x, -2, 3, 5, 6); }, rng), 1e-4);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::Pad(x, 2); }, rng), 1e-4);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::GlobalAvgPool(x); }, rng), 1e-4);
  EXPECT_LE(CheckOp({{"x", x}}, [&] { return ad::LiftKernel(x, 6); }, rng), 1e-4);
}

TEST(GradientTest, ProjectionMap) {
  std::mt19937 rng(11);
  auto proj = std::make_shared<const SparseLinearMap>(BuildKernelProjector(
      Representation::Regular(4), 1, Representation::Regular(4), 1, 3, 4));
  const TD raw = RandomParam({4, 4, 3, 3}, rng);
  EXPECT_LE(CheckOp({{"raw", raw}}, [&] { return ad::LinearMap(raw, proj, {4, 4, 3, 3}); }, rng), 1e-4);
}

TEST(AutodiffTest, MaxPoolTieGoesToLowestIndex) {
  const TD x = TD::Param({1, 2, 2}, {1.0, 1.0, 1.0, 1.0});
  ad::Backward(ad::Sum(ad::MaxPool2(x)));
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()),
            (std::vector<double>{1, 0, 0, 0}));
}

TEST(AutodiffTest, UpsampleCommutesWithQuarterTurn) {
  std::mt19937 rng(12);
  FeatureField f = FeatureField::Scalar(1, 6, 6);
  for (double& v : f.data()) v = std::normal_distribution<double>()(rng);
  const GroupElement g = GroupElement::Cyclic(4, 1);
  const FeatureField a = RotateBase(ad::UpsampleBilinear2(TD::FromField(f)).ToField(), g, Interp::kNearest);
  const FeatureField b = ad::UpsampleBilinear2(TD::FromField(RotateBase(f, g, Interp::kNearest))).ToField();
  EXPECT_LE(MaxAbsDiff(a, b), 1e-12);
}

TEST(AdamTest, ZeroGradientLeavesParams) {
  ParamStore<double> ps;
  TD p = ps.Add("p", {3}, {1.0, 2.0, 3.0});
  Adam<double> opt(&ps, {});
  ad::Backward(ad::Scale(ad::Sum(p), 0.0));
  opt.Step();
  EXPECT_EQ(p.data(), (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ParamStore<double> ps;
  TD p = ps.Add("p", {1}, {0.0});
  Adam<double> opt(&ps, {.lr = 1e-4});
  ad::Backward(ad::Sum(p));  // gradient 1
  opt.Step();
  EXPECT_NEAR(std::abs(p.data()[0]), 1e-4, 1e-8);
}

TEST(AdamTest, DeterministicRuns) {
  auto run = [] {
    std::mt19937 rng(13);
    ParamStore<float> ps;
    std::vector<float> init(25);
    for (float& v : init) v = std::normal_distribution<float>()(rng);
    Tensor<float> w = ps.Add("w", {1, 1, 5, 5}, init);
    std::vector<float> xv(64);
    for (float& v : xv) v = std::normal_distribution<float>()(rng);
    const Tensor<float> x = Tensor<float>::Constant({1, 8, 8}, xv);
    Adam<float> opt(&ps, {.lr = 1e-2});
    for (int s = 0; s < 20; ++s) {
      ps.ZeroGrad();
      ad::Backward(ad::SoftmaxCrossEntropy(ad::Conv2d(x, w), 5));
      opt.Step();
    }
    return w.data();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace eqtp
