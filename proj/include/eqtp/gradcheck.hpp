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

// Central finite-difference check of reverse-mode gradients.

#ifndef EQTP_GRADCHECK_HPP_
#define EQTP_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "eqtp/autodiff.hpp"

namespace eqtp {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  std::string worst;  // "<input>[<index>]"
};

struct GradCheckOptions {
  double step = 1e-3;
  int max_samples_per_input = 1 << 30;  // entries checked per input tensor
  int max_samples_total = 1 << 30;      // sampled uniformly across all inputs
  double abs_floor = 1e-6;              // denominators never drop below this
};

// `inputs` must be parameter tensors read by `loss`; each sampled entry is
// perturbed in place by +-step and restored.
inline GradCheckResult CheckGradients(std::vector<std::pair<std::string, ad::Tensor<double>>> inputs,
                                      const std::function<ad::Tensor<double>()>& loss,
                                      const GradCheckOptions& opts, std::mt19937& rng) {
  for (auto& [n, t] : inputs) t.ZeroGrad();
  ad::Backward(loss());
  std::vector<std::pair<int, size_t>> sites;
  for (size_t k = 0; k < inputs.size(); ++k) {
    std::vector<size_t> idx(inputs[k].second.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min<size_t>(idx.size(), opts.max_samples_per_input));
    for (size_t i : idx) sites.emplace_back(static_cast<int>(k), i);
  }
  std::shuffle(sites.begin(), sites.end(), rng);
  if (sites.size() > static_cast<size_t>(opts.max_samples_total)) sites.resize(opts.max_samples_total);

  GradCheckResult res;
  for (const auto& [k, i] : sites) {
    ad::Tensor<double>& t = inputs[k].second;
    const auto g = t.grad();
    const double analytic = g.empty() ? 0.0 : g[i];
    const double orig = t.data()[i];
    t.data()[i] = orig + opts.step;
    const double fp = loss().item();
    t.data()[i] = orig - opts.step;
    const double fm = loss().item();
    t.data()[i] = orig;
    const double numeric = (fp - fm) / (2 * opts.step);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), opts.abs_floor});
    const double rel = std::abs(analytic - numeric) / denom;
    ++res.checked;
    if (rel >= res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst = inputs[k].first + "[" + std::to_string(i) + "]";
    }
  }
  return res;
}

}  // namespace eqtp

#endif  // EQTP_GRADCHECK_HPP_
