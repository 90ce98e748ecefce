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

#include "qpt/random.hpp"

#include <cmath>

#include "qpt/error.hpp"

namespace qpt {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t k : path) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

Rng::Rng(const RngSeed& seed) : engine_(seed.seed) {
  if (seed.generator_id != kGeneratorId) {
    throw InvariantError("unknown generator id '" + seed.generator_id + "'");
  }
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  constexpr double kTwoPi = 6.283185307179586476925;
  // 1 - u lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::uint64_t Rng::binomial(std::uint64_t trials, double p) {
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) hits += uniform() < p ? 1 : 0;
  return hits;
}

std::size_t Rng::index(std::size_t n) {
  // The product can round up to n for u close to 1.
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace qpt
