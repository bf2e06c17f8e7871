// Copyright 2026 The SPINE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINE_CORE_CHECKPOINT_HPP
#define SPINE_CORE_CHECKPOINT_HPP

#include <string>

#include "core/trainer.hpp"

namespace spine {

/// Everything needed to resume or audit a training run: parameters,
/// optimizer state, the noise stream state, and the settings that
/// produced them.
struct Checkpoint {
  AutoencoderParams params;
  OptimizerState opt_state;
  std::string rng_state;
  Hyperparams hyper;
  TrainConfig train_cfg;
};

/// Versioned binary container at `path` plus a human-readable JSON sidecar
/// at `path + ".json"` carrying the hyperparameters and train settings.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace spine

#endif  // SPINE_CORE_CHECKPOINT_HPP
