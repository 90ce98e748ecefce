// Copyright 2026 The qpt Authors
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

/// \file random.hpp
/// \brief Deterministic random streams.
///
/// Every sample is derived from std::mt19937_64 raw output with
/// hand-written transforms, because the standard distributions are
/// implementation-defined and would break byte-for-byte reproducibility
/// across standard libraries.
///   uniform:  (x >> 11) * 2^-53, in [0, 1)
///   normal:   Box-Muller on two uniforms, cosine branch only
///   binomial: sum of Bernoulli draws

#ifndef QPT_RANDOM_HPP_
#define QPT_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace qpt {

inline constexpr const char* kGeneratorId = "mt19937_64/box-muller-v1";

struct RngSeed {
  std::uint64_t seed = 0;
  std::string generator_id = kGeneratorId;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stable hash of a master seed and a key path, e.g. (master, rank, channel,
/// trial). Independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  /// Throws InvariantError for an unknown generator_id.
  explicit Rng(const RngSeed& seed);

  double uniform();
  double normal();
  /// Number of successes in `trials` Bernoulli(p) draws.
  std::uint64_t binomial(std::uint64_t trials, double p);
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

  /// Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qpt

#endif  // QPT_RANDOM_HPP_
