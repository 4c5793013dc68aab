/*
 * Copyright 2026 The menkf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "menkf/linalg.hpp"

#include <cstdint>
#include <random>

namespace menkf {

/// Seeded, splittable generator. Children derived with split() are
/// deterministic functions of (parent seed, stream id), so independent
/// consumers can draw from their own stream without coordinating order.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream.
  Rng split(std::uint64_t stream) const;

  double normal();
  double uniform();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// rows x cols matrix of iid N(0, 1), filled column-major.
  Matrix standard_normal(Index rows, Index cols);

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; used for seed derivation.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace menkf
