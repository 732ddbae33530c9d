// core/src/optim.cpp

// Copyright 2026 The zintent Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "zintent/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zintent/errors.hpp"

namespace zintent {

AdamState AdamState::init(std::span<Matrix* const> params, const AdamConfig& config) {
  if (!(config.lr > 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.eps > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  AdamState s;
  s.config = config;
  for (const Matrix* p : params) {
    s.first_moment.emplace_back(p->rows(), p->cols());
    s.second_moment.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " params, " +
                         std::to_string(grads.size()) + " grads, " +
                         std::to_string(state.first_moment.size()) + " moments");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape() || params[i]->shape() != state.first_moment[i].shape()) {
      throw DimensionError("adam_step: parameter " + params[i]->shape() + " vs gradient " +
                           grads[i].shape());
    }
  }
  const auto& c = state.config;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->values();
    auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

PlateauScheduler PlateauScheduler::make(double lr, std::size_t patience, double factor, double min_lr) {
  if (!(factor > 0.0 && factor < 1.0)) throw ConfigError("scheduler factor must lie in (0, 1)");
  if (!(lr > 0.0) || !(min_lr >= 0.0)) throw ConfigError("scheduler rates must be positive");
  PlateauScheduler s;
  s.current_lr = std::max(lr, min_lr);
  s.patience = patience;
  s.factor = factor;
  s.min_lr = min_lr;
  return s;
}

bool scheduler_step(PlateauScheduler& sched, double dev_metric) {
  if (dev_metric > sched.best_metric) {
    sched.best_metric = dev_metric;
    sched.epochs_since_improve = 0;
    return false;
  }
  sched.epochs_since_improve += 1;
  if (sched.epochs_since_improve > sched.patience) {
    sched.epochs_since_improve = 0;
    const double next = std::max(sched.current_lr * sched.factor, sched.min_lr);
    const bool reduced = next < sched.current_lr;
    sched.current_lr = next;
    return reduced;
  }
  return false;
}

}  // namespace zintent
