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

#ifndef SPINE_CORE_RNG_HPP
#define SPINE_CORE_RNG_HPP

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace spine {

/// Derives the seed of a named sub-stream from a master seed. Every
/// randomized component draws from its own stream (split, init, noise,
/// shuffle, intrusion, ...) so runs can be replayed per component.
uint64_t derive_seed(uint64_t master_seed, std::string_view stream_name);

/// Seeded random generator with pinned output sequences. The uniform and
/// normal transforms are implemented here (not via std::*_distribution)
/// so that a given seed yields the same draws on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  static Rng substream(uint64_t master_seed, std::string_view stream_name) {
    return Rng(derive_seed(master_seed, stream_name));
  }

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal draw (Box-Muller).
  double normal();

  /// Uniform integer in [0, bound), bound >= 1. Rejection-sampled, unbiased.
  uint64_t integer(uint64_t bound);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(integer(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Engine state as text, for checkpointing.
  std::string state() const;
  void set_state(const std::string& text);

 private:
  std::mt19937_64 engine_;
};

}  // namespace spine

#endif  // SPINE_CORE_RNG_HPP
