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

// Grayscale PNG import/export of single-channel fields (values in [0, 1]).

#ifndef EQTP_IMAGE_IO_HPP_
#define EQTP_IMAGE_IO_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <opencv2/imgcodecs.hpp>

#include "eqtp/feature_field.hpp"

namespace eqtp {

inline void WritePng(const std::string& path, const FeatureField& f, int channel = 0,
                     int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("PNG bit depth must be 8 or 16");
  if (channel < 0 || channel >= f.channels()) throw std::invalid_argument("PNG channel out of range");
  const double scale = bit_depth == 8 ? 255.0 : 65535.0;
  cv::Mat img(f.height(), f.width(), bit_depth == 8 ? CV_8UC1 : CV_16UC1);
  for (int r = 0; r < f.height(); ++r) {
    for (int c = 0; c < f.width(); ++c) {
      const double v = std::lround(std::clamp(f.at(channel, r, c), 0.0, 1.0) * scale);
      if (bit_depth == 8) {
        img.at<uint8_t>(r, c) = static_cast<uint8_t>(v);
      } else {
        img.at<uint16_t>(r, c) = static_cast<uint16_t>(v);
      }
    }
  }
  if (!cv::imwrite(path, img)) throw std::runtime_error("failed to write PNG " + path);
}

inline FeatureField ReadPng(const std::string& path, double pixel_pitch = 1.0) {
  cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (img.empty()) throw std::runtime_error("failed to read PNG " + path);
  if (img.channels() != 1) throw std::runtime_error(path + ": only grayscale PNGs are supported");
  FeatureField f = FeatureField::Scalar(1, img.rows, img.cols, pixel_pitch);
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      if (img.depth() == CV_8U) {
        f.at(0, r, c) = img.at<uint8_t>(r, c) / 255.0;
      } else if (img.depth() == CV_16U) {
        f.at(0, r, c) = img.at<uint16_t>(r, c) / 65535.0;
      } else {
        throw std::runtime_error(path + ": unsupported PNG depth");
      }
    }
  }
  return f;
}

}  // namespace eqtp

#endif  // EQTP_IMAGE_IO_HPP_
