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

// Learning-curve plots from evaluation reports.

#ifndef EQTP_PLOT_HPP_
#define EQTP_PLOT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "eqtp/harness.hpp"

namespace eqtp {

struct Series {
  std::string label;
  std::vector<std::pair<int, double>> points;  // (step, score), sorted by step
};

// Whole-string numeric parse; nullopt on junk.
template <typename T>
std::optional<T> ParseNumber(const std::string& v) {
  try {
    size_t pos = 0;
    T x;
    if constexpr (std::is_integral_v<T>) {
      x = std::stoi(v, &pos);
    } else {
      x = std::stod(v, &pos);
    }
    if (pos == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  return std::nullopt;
}

// Groups report rows into one series per variant (and per seed when a report
// mixes several seeds). Needs "step" and "mean_score" columns.
inline std::vector<Series> SeriesFromCsv(const CsvTable& t) {
  const int step_col = t.Column("step"), score_col = t.Column("mean_score");
  if (step_col < 0 || score_col < 0) {
    throw std::invalid_argument("CSV needs 'step' and 'mean_score' columns");
  }
  const int variant_col = t.Column("variant"), seed_col = t.Column("seed");
  std::set<std::string> seeds;
  if (seed_col >= 0) {
    for (const auto& row : t.rows) seeds.insert(row[seed_col]);
  }
  std::map<std::string, Series> by_label;
  std::vector<std::string> order;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("CSV line " + std::to_string(t.row_lines[i]) + ": " + msg);
    };
    const auto step = ParseNumber<int>(row[step_col]);
    const auto score = ParseNumber<double>(row[score_col]);
    if (!step) fail("bad step '" + row[step_col] + "'");
    if (!score) fail("bad score '" + row[score_col] + "'");
    if (!std::isfinite(*score)) fail("score is not finite");
    std::string label = variant_col >= 0 ? row[variant_col] : "score";
    if (seeds.size() > 1) label += " seed " + row[seed_col];
    if (!by_label.count(label)) {
      order.push_back(label);
      by_label[label].label = label;
    }
    by_label[label].points.emplace_back(*step, *score);
  }
  if (order.empty()) throw std::invalid_argument("CSV has no data rows");
  std::vector<Series> out;
  for (const auto& l : order) {
    Series s = by_label[l];
    std::stable_sort(s.points.begin(), s.points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    out.push_back(std::move(s));
  }
  return out;
}

// Step-aligned table: one row per step seen in any series, each series
// holding its most recent evaluated score (empty before its first one).
inline std::string ResampledCsv(const std::vector<Series>& series) {
  std::set<int> steps;
  for (const auto& s : series) {
    for (const auto& p : s.points) steps.insert(p.first);
  }
  std::vector<std::string> header = {"step"};
  for (const auto& s : series) header.push_back(s.label);
  std::string out = CsvLine(header);
  std::vector<size_t> cursor(series.size(), 0);
  for (int step : steps) {
    std::vector<std::string> row = {std::to_string(step)};
    for (size_t i = 0; i < series.size(); ++i) {
      const auto& pts = series[i].points;
      while (cursor[i] < pts.size() && pts[cursor[i]].first <= step) ++cursor[i];
      row.push_back(cursor[i] == 0 ? "" : FormatScore(pts[cursor[i] - 1].second));
    }
    out += CsvLine(row);
  }
  return out;
}

inline cv::Mat RenderPlot(const std::vector<Series>& series, int width = 800, int height = 500) {
  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const int left = 70, right = 40, top = 40, bottom = 60;
  const int pw = width - left - right, ph = height - top - bottom;
  int max_step = 1;
  for (const auto& s : series) {
    for (const auto& p : s.points) max_step = std::max(max_step, p.first);
  }
  auto px = [&](int step, double score) {
    const double x = left + pw * static_cast<double>(step) / max_step;
    const double y = top + ph * (1.0 - std::clamp(score, 0.0, 1.0));
    return cv::Point(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y)));
  };
  const cv::Scalar black(0, 0, 0), grey(210, 210, 210);
  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    cv::line(img, px(0, v), px(max_step, v), grey, 1);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    cv::putText(img, buf, px(0, v) + cv::Point(-40, 5), font, 0.45, black, 1, cv::LINE_AA);
    const int step = static_cast<int>(std::lround(max_step * v));
    cv::line(img, px(step, 0), px(step, 0) + cv::Point(0, 5), black, 1);
    cv::putText(img, std::to_string(step), px(step, 0) + cv::Point(-12, 22), font, 0.45, black, 1,
                cv::LINE_AA);
  }
  cv::line(img, px(0, 0), px(max_step, 0), black, 1);
  cv::line(img, px(0, 0), px(0, 1), black, 1);
  cv::putText(img, "training step", cv::Point(left + pw / 2 - 50, height - 15), font, 0.5, black, 1,
              cv::LINE_AA);
  cv::putText(img, "success", cv::Point(5, top - 20), font, 0.45, black, 1, cv::LINE_AA);
  static const cv::Scalar palette[] = {{200, 80, 30}, {40, 40, 210}, {40, 160, 40},
                                       {160, 40, 160}, {30, 150, 200}, {90, 90, 90}};
  for (size_t i = 0; i < series.size(); ++i) {
    const cv::Scalar color = palette[i % std::size(palette)];
    const auto& pts = series[i].points;
    for (size_t k = 0; k < pts.size(); ++k) {
      const cv::Point p = px(pts[k].first, pts[k].second);
      cv::circle(img, p, 3, color, cv::FILLED, cv::LINE_AA);
      if (k > 0) cv::line(img, px(pts[k - 1].first, pts[k - 1].second), p, color, 2, cv::LINE_AA);
    }
    const cv::Point legend(left + 15, top + 20 + 20 * static_cast<int>(i));
    cv::line(img, legend, legend + cv::Point(25, 0), color, 2, cv::LINE_AA);
    cv::putText(img, series[i].label, legend + cv::Point(32, 5), font, 0.45, black, 1, cv::LINE_AA);
  }
  return img;
}

// Writes the PNG plot to `png_path` and the resampled table next to it
// (same stem, .csv).
inline void PlotReport(const std::string& csv_path, const std::string& png_path) {
  const auto series = SeriesFromCsv(ParseCsv(ReadText(csv_path)));
  if (!cv::imwrite(png_path, RenderPlot(series))) {
    throw std::runtime_error("cannot write " + png_path);
  }
  std::string resampled = png_path;
  const auto dot = resampled.rfind('.');
  const auto slash = resampled.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) resampled.resize(dot);
  WriteText(resampled + "_resampled.csv", ResampledCsv(series));
}

}  // namespace eqtp

#endif  // EQTP_PLOT_HPP_
