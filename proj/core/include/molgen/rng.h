//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_RNG_H_
#define MOLGEN_RNG_H_

#include <cstdint>

namespace molgen {
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream: every draw is a pure function of its key, so the
/// value for (seed, sequence, step) does not depend on batch composition.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed): seed_(seed) { }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const;
  // Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t counter) const;

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
};

// Derives an independent seed for a sub-task (e.g. a training step).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);
}  // namespace molgen

#endif  // MOLGEN_RNG_H_
