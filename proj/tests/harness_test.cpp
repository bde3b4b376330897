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

#include "eqtp/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace eqtp {
namespace {

TEST(RunConfigTest, RoundTripIsLossless) {
  RunConfig c;
  c.task = "goal-insertion";
  c.goal = true;
  c.lr = 0.1 + 0.2;
  c.seed = 18446744073709551615ULL;
  c.stop_score = 0.85;
  c.model.unet_widths = {1, 3, 5};
  c.model.head_init = 1.0 / 3.0;
  c.out_dir = "runs/a b";
  const RunConfig back = RunConfig::Parse(c.ToString());
  EXPECT_EQ(back.ToString(), c.ToString());
  EXPECT_EQ(back.lr, c.lr);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.model.head_init, c.model.head_init);
  EXPECT_EQ(back.model.unet_widths, c.model.unet_widths);
  EXPECT_EQ(back.out_dir, "runs/a b");
}

TEST(RunConfigTest, CommentsAndBlankLinesAreSkipped) {
  const RunConfig c = RunConfig::Parse("# run\n\n  steps = 12\r\nbaseline=true\n");
  EXPECT_EQ(c.steps, 12);
  EXPECT_TRUE(c.baseline);
}

TEST(RunConfigTest, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    try {
      RunConfig::Parse(text);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("steps=1\nlearning_rate=3\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("steps=1\nsteps=2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(message("steps=ten\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("steps=1.5\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("baseline=maybe\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("seed=-1\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("justtext\n").find("key=value"), std::string::npos);
}

TEST(RunConfigTest, ValidateRejectsBadValues) {
  RunConfig c;
  EXPECT_NO_THROW(c.Validate());
  auto bad = [](auto edit) {
    RunConfig c;
    edit(c);
    EXPECT_THROW(c.Validate(), std::invalid_argument);
  };
  bad([](RunConfig& c) { c.task = "stack-blocks"; });
  bad([](RunConfig& c) { c.steps = 0; });
  bad([](RunConfig& c) { c.eval_episodes = 0; });
  bad([](RunConfig& c) { c.lr = -1; });
  bad([](RunConfig& c) { c.augment = "sometimes"; });
  bad([](RunConfig& c) { c.goal = true; });
  bad([](RunConfig& c) { c.task = "goal-insertion"; });
  bad([](RunConfig& c) { c.model.pick_crop = 16; });
}

TEST(RunConfigTest, AugmentationDefaultsFollowTheVariant) {
  RunConfig c;
  EXPECT_FALSE(c.augmentation_enabled());
  c.baseline = true;
  EXPECT_TRUE(c.augmentation_enabled());
  c.augment = "off";
  EXPECT_FALSE(c.augmentation_enabled());
  c.baseline = false;
  c.augment = "on";
  EXPECT_TRUE(c.augmentation_enabled());
}

TEST(AugmentTest, QuarterTurnMatchesRotatedScene) {
  for (const auto& name : TaskNames()) {
    const TaskSpec task = MakeTask(name);
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const Scene s = Reset(task, seed);
      for (int k = 1; k < 4; ++k) {
        FeatureField obs = Observe(s);
        PickPlaceAction a = Oracle(s);
        TransformExample(&obs, &a, k, 0, 0);
        Scene rotated = RotateScene(s, k);
        const FeatureField expected = Observe(rotated);
        int diff = 0;
        for (size_t i = 0; i < obs.data().size(); ++i) diff += obs.data()[i] != expected.data()[i];
        EXPECT_LE(diff, 2) << name << " seed " << seed << " k " << k;
        EXPECT_EQ(Step(rotated, a), 1.0) << name << " seed " << seed << " k " << k;
      }
    }
  }
}

TEST(AugmentTest, TranslationCarriesActionPixels) {
  const Scene s = Reset(MakeTask("block-insertion"), 3);
  const FeatureField obs = Observe(s);
  const PickPlaceAction a = Oracle(s);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    FeatureField aug = obs;
    PickPlaceAction b = a;
    Augment(&aug, &b, 8, rng);
    for (int u : {b.pick_u, b.pick_v, b.place_u, b.place_v}) {
      EXPECT_GE(u, 0);
      EXPECT_LT(u, obs.height());
    }
    EXPECT_GT(aug.at(0, b.pick_u, b.pick_v), 0.0);
    EXPECT_GE(b.pick_theta, 0.0);
    EXPECT_LT(b.pick_theta, std::numbers::pi);
    EXPECT_EQ(b.place_theta, a.place_theta);
  }
}

TEST(EvaluateTest, OracleScoresNearlyPerfect) {
  for (const auto& name : TaskNames()) {
    const EvalResult r = Evaluate(MakeTask(name), 100, kEvalSeedOffset, OraclePolicy(), 2);
    EXPECT_GE(r.mean, 0.99) << name;
  }
}

TEST(EvaluateTest, RandomPolicyScoresLow) {
  const TaskSpec task = MakeTask("block-insertion");
  const Policy random = [](const Scene& s) {
    std::mt19937_64 rng(s.seed);
    std::uniform_int_distribution<int> pix(0, s.width - 1);
    std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
    return PickPlaceAction{pix(rng), pix(rng), ang(rng) / 2, pix(rng), pix(rng), ang(rng)};
  };
  EXPECT_LE(Evaluate(task, 200, kEvalSeedOffset, random, 1).mean, 0.1);
}

TEST(EvaluateTest, ResultsDoNotDependOnThreadCount) {
  const TaskSpec task = MakeTask("align-corner");
  TransporterModel<float> model(ModelConfig{}, 3);
  const auto one = Evaluate(task, 6, 500, ModelPolicy(model), 1);
  const auto three = Evaluate(task, 6, 500, ModelPolicy(model), 3);
  EXPECT_EQ(one.scores, three.scores);
  const auto oracle_one = Evaluate(task, 30, 7, OraclePolicy(), 1);
  const auto oracle_four = Evaluate(task, 30, 7, OraclePolicy(), 4);
  EXPECT_EQ(oracle_one.scores, oracle_four.scores);
}

TEST(EvaluateTest, RejectsEmptyRuns) {
  EXPECT_THROW(Evaluate(MakeTask("block-insertion"), 0, 0, OraclePolicy()), std::invalid_argument);
}

RunConfig SmallRun() {
  RunConfig c;
  c.steps = 4;
  c.demos = 2;
  c.eval_interval = 2;
  c.eval_episodes = 2;
  c.model.n_place = 8;
  c.model.n_pick = 4;
  c.model.unet_widths = {1, 1, 1};
  return c;
}

TEST(TrainTest, DeterministicAndEvaluatesOnSchedule) {
  const RunConfig c = SmallRun();
  const auto data = GenerateDemos(MakeTask(c.task), 2, 0);
  TransporterModel<float> a(c.EffectiveModel(), c.seed), b(c.EffectiveModel(), c.seed);
  std::vector<double> la, lb;
  const TrainResult ra = Train(c, data, a, {nullptr, [&](int, double l) { la.push_back(l); }});
  const TrainResult rb = Train(c, data, b, {nullptr, [&](int, double l) { lb.push_back(l); }});
  EXPECT_EQ(la, lb);
  ASSERT_EQ(ra.rows.size(), 3u);
  EXPECT_EQ(ra.rows[0].step, 0);
  EXPECT_EQ(ra.rows[1].step, 2);
  EXPECT_EQ(ra.rows[2].step, 4);
  EXPECT_EQ(ra.steps_done, 4);
  EXPECT_EQ(ReportCsv(c, ra), ReportCsv(c, rb));
}

TEST(TrainTest, StopsOnceScoreIsReached) {
  RunConfig c = SmallRun();
  c.stop_score = 0.0;
  const auto data = GenerateDemos(MakeTask(c.task), 2, 0);
  TransporterModel<float> m(c.EffectiveModel(), 0);
  const TrainResult r = Train(c, data, m);
  EXPECT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.steps_done, 0);
  EXPECT_TRUE(r.stopped_early);
}

TEST(TrainTest, RejectsMismatchedData) {
  RunConfig c = SmallRun();
  TransporterModel<float> m(c.EffectiveModel(), 0);
  EXPECT_THROW(Train(c, GenerateDemos(MakeTask(c.task), 1, 0), m), std::invalid_argument);
  EXPECT_THROW(Train(c, GenerateDemos(MakeTask("align-corner"), 2, 0), m), std::invalid_argument);
  EXPECT_THROW(Train(c, GenerateDemos(MakeTask(c.task), 2, kEvalSeedOffset), m),
               std::invalid_argument);
}

TEST(TrainTest, RunTrainingWritesArtifactsAndCheckpointReloads) {
  RunConfig c = SmallRun();
  const auto dir = std::filesystem::temp_directory_path() / "eqtp_run_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  c.dataset = (dir / "demos.eqpd").string();
  c.out_dir = (dir / "out").string();
  WriteDataset(c.dataset, GenerateDemos(MakeTask(c.task), 2, 0));
  RunTraining(c);
  for (const char* f : {"report.csv", "timing.csv", "config.txt", "best.eqck", "last.eqck"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  }
  const CsvTable t = ParseCsv(ReadText((dir / "out" / "report.csv").string()));
  EXPECT_EQ(t.header[0], "step");
  EXPECT_EQ(t.rows.size(), 3u);
  LoadedModel loaded = LoadModel((dir / "out" / "last.eqck").string());
  EXPECT_EQ(loaded.config.ToString(), c.ToString());
  std::filesystem::remove_all(dir);
}

TEST(CsvTest, QuotingRoundTrips) {
  const std::vector<std::string> fields = {"plain", "a,b", "say \"hi\"", "two\nlines", ""};
  const CsvTable t = ParseCsv(CsvLine({"a", "b", "c", "d", "e"}) + CsvLine(fields));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], fields);
}

TEST(CsvTest, MalformedInputNamesTheLine) {
  auto message = [](const std::string& text) {
    try {
      ParseCsv(text);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("a,b\n1,2\n3\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("a,b\n1,\"2\n").find("unterminated"), std::string::npos);
  EXPECT_NE(message("a,b\n1,\"2\"x\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("").find("empty"), std::string::npos);
}

}  // namespace
}  // namespace eqtp
