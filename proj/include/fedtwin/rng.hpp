// Copyright 2026 The fedtwin Authors
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

#ifndef FEDTWIN_RNG_HPP_
#define FEDTWIN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace fedtwin {

// splitmix64 finalizer; used to hash (seed, stream, frame) tuples into engine
// seeds so that every stream is an independent, randomly accessible function
// of the run seed. Pinned algorithm: reproducibility guarantees depend on it.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// Independent draw streams. Worlds are identical across policies/frameworks
// for a given seed because world streams never share state with policy ones.
enum class Stream : std::uint64_t {
  kScenario = 1,      // per-scenario parameter draws (positions, powers, ...)
  kImportance = 2,    // I_c(t)
  kSensorData = 3,    // d_{n,c}(t)
  kChannel = 4,       // H_{n,b,w}(t)
  kCoalitionInit = 5, // random fill in coalition-formation initialization
  kPolicy = 6,        // policy-side randomness (net init, exploration)
  kQlearn = 7,        // tabular Q exploration
  kFuzz = 8,          // test-side fuzzing
};

// Deterministic generator: std::mt19937_64 engine (output pinned by the
// standard) with hand-rolled distributions, because the standard library's
// distribution objects are not bit-reproducible across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 significant bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [lo, hi], inclusive. Rejection sampling, unbiased.
  int uniform_int(int lo, int hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<int>(v % range);
  }

  // Standard normal via Box-Muller; caches the spare draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925287;
    spare_ = mag * std::sin(two_pi * u2);
    has_spare_ = true;
    return mag * std::cos(two_pi * u2);
  }

  // Fisher-Yates shuffle of an index-like container.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      const int j = uniform_int(0, i);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derived seed of a (seed, stream, frame) tuple; recorded in traces so
// replay can reconstruct the exact same generator.
inline std::uint64_t stream_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t frame = 0) {
  return hash_combine(hash_combine(seed, static_cast<std::uint64_t>(stream)),
                      frame);
}

// Stream constructor: every (seed, stream, frame) tuple owns a fresh engine,
// so per-frame draws are randomly accessible and order-independent.
inline Rng stream_rng(std::uint64_t seed, Stream stream, std::uint64_t frame = 0) {
  return Rng(stream_seed(seed, stream, frame));
}

}  // namespace fedtwin

#endif  // FEDTWIN_RNG_HPP_
