// Copyright 2026 The toomdtc Authors
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

#ifndef TOOMDTC_RNG_H
#define TOOMDTC_RNG_H

#include <cstddef>
#include <cstdint>
#include <random>

namespace toomdtc {

/// Every stochastic decision in the library draws from this engine. The
/// mt19937_64 output sequence is fixed by the C++ standard, so trajectories
/// are bit-reproducible across platforms and standard libraries.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of the stream owned by one trajectory of one sweep point.
///
/// The derivation is counter based: the seed is a pure function of
/// (master_seed, point_index, trajectory_index), so results do not depend on
/// which worker runs which trajectory.
///
///     s = mix64(master_seed)
///     s = mix64(s ^ mix64(point_index + 1))
///     s = mix64(s ^ mix64(~(trajectory_index + 1)))
constexpr uint64_t stream_seed(uint64_t master_seed, uint64_t point_index, uint64_t trajectory_index) {
    uint64_t s = mix64(master_seed);
    s = mix64(s ^ mix64(point_index + 1));
    s = mix64(s ^ mix64(~(trajectory_index + 1)));
    return s;
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// One draw; true with probability p.
inline bool bernoulli(Rng &rng, double p) {
    return uniform01(rng) < p;
}

/// One draw; uniform in [0, k). Requires k > 0.
inline size_t uniform_index(Rng &rng, size_t k) {
    auto i = static_cast<size_t>(uniform01(rng) * static_cast<double>(k));
    return i < k ? i : k - 1;
}

}  // namespace toomdtc

#endif
