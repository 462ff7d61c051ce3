//
// Copyright 2026 The FeO2 Authors
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
//

#ifndef FEO2_RNG_H_
#define FEO2_RNG_H_

#include <cstdint>
#include <random>

namespace feo2 {

// What a random stream is used for. Each purpose gets an independent stream
// so that adding draws in one place never shifts draws in another.
enum class StreamPurpose : uint64_t {
  kCohortSampling = 1,
  kClientBatching = 2,
  kServerNoise = 3,
  kClipNoise = 4,
  kPopulation = 5,
  kMonteCarlo = 6,
  kDataSplit = 7,
};

// SplitMix64 finalizer.
constexpr uint64_t MixBits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the stream identified by (master, round, client, purpose). Streams
// depend only on these four values, never on scheduling order.
constexpr uint64_t DeriveSeed(uint64_t master_seed, uint64_t round,
                              uint64_t client_id, StreamPurpose purpose) {
  uint64_t h = MixBits(master_seed);
  h = MixBits(h ^ round);
  h = MixBits(h ^ (client_id * 0x2545f4914f6cdd1dULL));
  return MixBits(h ^ static_cast<uint64_t>(purpose));
}

using Rng = std::mt19937_64;

inline Rng MakeStream(uint64_t master_seed, uint64_t round, uint64_t client_id,
                      StreamPurpose purpose) {
  return Rng(DeriveSeed(master_seed, round, client_id, purpose));
}

// Client id used for server-side streams.
inline constexpr uint64_t kServerStreamId = ~uint64_t{0};

}  // namespace feo2

#endif  // FEO2_RNG_H_
