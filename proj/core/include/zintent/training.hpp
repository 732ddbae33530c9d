// core/include/zintent/training.hpp

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
#include <cstdint>
#include <span>
#include <vector>

#include "zintent/corpus.hpp"
#include "zintent/optim.hpp"
#include "zintent/rng.hpp"

namespace zintent {

/// Optimization settings shared by teacher and student training.
struct TrainConfig {
  std::size_t epochs = 60;
  std::size_t batch_size = 8;
  AdamConfig adam;
  std::size_t scheduler_patience = 3;
  double scheduler_factor = 0.5;
  double min_lr = 1e-6;
  // Stop after this many epochs without dev-accuracy improvement. 0 disables.
  std::size_t early_stop_patience = 10;
  // Drives batch order and dropout masks.
  std::uint64_t seed = 1;
  // No parameter updates at all (losses and metrics are still traced).
  bool freeze_all = false;

  void validate() const;
};

// Contiguous batches of a fresh permutation of [0, n).
std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n, std::size_t batch_size, Rng& rng);
// Contiguous batches of [0, n) in order.
std::vector<std::vector<std::size_t>> ordered_batches(std::size_t n, std::size_t batch_size);

// Position of `intent` in `classes`; throws ConfigError if absent.
std::size_t class_index(std::span<const IntentId> classes, IntentId intent);

std::size_t argmax(std::span<const double> values);

}  // namespace zintent
