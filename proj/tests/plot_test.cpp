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

#include "eqtp/plot.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include <opencv2/imgcodecs.hpp>

namespace eqtp {
namespace {

TEST(PlotTest, GroupsSeriesByVariant) {
  const CsvTable t = ParseCsv(
      "step,mean_score,variant\n0,0.1,equivariant\n0,0.0,baseline\n100,0.9,equivariant\n"
      "200,0.5,baseline\n");
  const auto series = SeriesFromCsv(t);
  ASSERT_EQ(series.size(), 2u);
  EXPECT_EQ(series[0].label, "equivariant");
  EXPECT_EQ(series[1].points.size(), 2u);
  EXPECT_EQ(ResampledCsv(series),
            "step,equivariant,baseline\r\n0,0.100000,0.000000\r\n100,0.900000,0.000000\r\n"
            "200,0.900000,0.500000\r\n");
}

TEST(PlotTest, SeedsSplitSeriesWhenMixed) {
  const auto series = SeriesFromCsv(
      ParseCsv("step,mean_score,variant,seed\n0,0,eq,1\n0,0,eq,2\n"));
  ASSERT_EQ(series.size(), 2u);
  EXPECT_EQ(series[1].label, "eq seed 2");
}

TEST(PlotTest, BadRowsNameTheLine) {
  try {
    SeriesFromCsv(ParseCsv("step,mean_score\n0,0.5\nten,0.5\n"));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(SeriesFromCsv(ParseCsv("step,score\n0,1\n")), std::invalid_argument);
  EXPECT_THROW(SeriesFromCsv(ParseCsv("step,mean_score\n")), std::invalid_argument);
}

TEST(PlotTest, WritesPngAndResampledCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "eqtp_plot_test";
  std::filesystem::create_directories(dir);
  const std::string csv = (dir / "r.csv").string(), png = (dir / "curve.png").string();
  WriteText(csv, "step,mean_score\n5,0.25\n");
  PlotReport(csv, png);
  const cv::Mat img = cv::imread(png);
  EXPECT_EQ(img.cols, 800);
  EXPECT_EQ(img.rows, 500);
  EXPECT_EQ(ReadText((dir / "curve_resampled.csv").string()), "step,score\r\n5,0.250000\r\n");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace eqtp
