#ifndef CEK_RANDOM_H_
#define CEK_RANDOM_H_

#include <cstdint>

namespace cek {

// Mixes a base seed with a stream index (fold, replicate, tree...) so that
// child seeds are decorrelated and independent of execution order.
constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cek

#endif  // CEK_RANDOM_H_
