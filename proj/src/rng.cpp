#include "dimershuffle/rng.hpp"

namespace dimershuffle {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RngStream::bits(std::uint64_t k, std::uint32_t i, std::uint32_t j) const {
  std::uint64_t h = mix64(seed_ ^ 0x6a09e667f3bcc908ULL);
  h = mix64(h ^ k);
  h = mix64(h ^ ((static_cast<std::uint64_t>(i) << 32) | j));
  return h;
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(mix64(mix64(seed_ ^ 0xbb67ae8584caa73bULL) ^ index));
}

}  // namespace dimershuffle
