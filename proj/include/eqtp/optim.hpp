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

#ifndef EQTP_OPTIM_HPP_
#define EQTP_OPTIM_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eqtp/autodiff.hpp"

namespace eqtp {

// Named trainable tensors in registration order.
template <typename T>
class ParamStore {
 public:
  ad::Tensor<T> Add(const std::string& name, ad::Shape shape, std::vector<T> init) {
    for (const auto& [n, t] : params_) {
      if (n == name) throw std::invalid_argument("duplicate parameter name " + name);
    }
    ad::Tensor<T> t = ad::Tensor<T>::Param(std::move(shape), std::move(init));
    params_.emplace_back(name, t);
    return t;
  }

  std::vector<std::pair<std::string, ad::Tensor<T>>>& items() { return params_; }
  const std::vector<std::pair<std::string, ad::Tensor<T>>>& items() const { return params_; }

  ad::Tensor<T> Find(const std::string& name) const {
    for (const auto& [n, t] : params_) {
      if (n == name) return t;
    }
    throw std::invalid_argument("no parameter named " + name);
  }

  size_t Count() const {
    size_t n = 0;
    for (const auto& [name, t] : params_) n += t.size();
    return n;
  }

  void ZeroGrad() {
    for (auto& [n, t] : params_) t.ZeroGrad();
  }

 private:
  std::vector<std::pair<std::string, ad::Tensor<T>>> params_;
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction; moments are kept in double.
template <typename T>
class Adam {
 public:
  Adam(ParamStore<T>* params, AdamOptions opts) : params_(params), opts_(opts) {
    for (const auto& [n, t] : params_->items()) {
      m_.emplace_back(t.size(), 0.0);
      v_.emplace_back(t.size(), 0.0);
    }
  }

  int step_count() const { return step_; }
  const AdamOptions& options() const { return opts_; }

  void Step() {
    auto& items = params_->items();
    if (items.size() != m_.size()) throw std::logic_error("parameters changed after Adam init");
    ++step_;
    const double c1 = 1.0 - std::pow(opts_.beta1, step_);
    const double c2 = 1.0 - std::pow(opts_.beta2, step_);
    for (size_t k = 0; k < items.size(); ++k) {
      ad::Tensor<T>& p = items[k].second;
      const auto g = p.grad();
      if (g.empty()) continue;  // unused this step
      auto& m = m_[k];
      auto& v = v_[k];
      for (size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i];
        m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * gi;
        v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * gi * gi;
        const double update = opts_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + opts_.eps);
        p.data()[i] = static_cast<T>(p.data()[i] - update);
      }
    }
  }

 private:
  ParamStore<T>* params_;
  AdamOptions opts_;
  int step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace eqtp

#endif  // EQTP_OPTIM_HPP_
