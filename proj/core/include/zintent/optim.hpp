// core/include/zintent/optim.hpp

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

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "zintent/matrix.hpp"

namespace zintent {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::size_t step_count = 0;

  // Zero moments shaped like `params`.
  static AdamState init(std::span<Matrix* const> params, const AdamConfig& config);
};

/// One bias-corrected Adam update in place. Uses state.config.lr as the step size.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamState& state);

/// Reduce-on-plateau schedule for a metric that should increase (dev accuracy).
///
/// An epoch whose metric does not exceed the best so far counts as bad; once
/// the bad count exceeds `patience` the rate is multiplied by `factor`
/// (floored at `min_lr`) and the count resets.
struct PlateauScheduler {
  double current_lr = 1e-4;
  std::size_t patience = 3;
  double factor = 0.5;
  double min_lr = 1e-6;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improve = 0;

  static PlateauScheduler make(double lr, std::size_t patience, double factor, double min_lr);
};

// Returns true when the rate was reduced on this step.
bool scheduler_step(PlateauScheduler& sched, double dev_metric);

}  // namespace zintent
