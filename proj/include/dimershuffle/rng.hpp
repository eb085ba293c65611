#pragma once

#include <cstdint>

namespace dimershuffle {

// Counter-based stream: the draw for (k, i, j) depends only on (seed, k, i, j),
// so results do not depend on iteration order or thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits(std::uint64_t k, std::uint32_t i, std::uint32_t j) const;
  // Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t k, std::uint32_t i, std::uint32_t j) const {
    return static_cast<double>(bits(k, i, j) >> 11) * 0x1.0p-53;
  }
  // Independent stream for a sub-task, e.g. a replica index.
  RngStream substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace dimershuffle
