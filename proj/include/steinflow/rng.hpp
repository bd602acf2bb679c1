#pragma once

#include <cstdint>
#include <random>

namespace steinflow {

/// Seeded random stream with portable output: the generator (mt19937_64) and
/// the Gaussian transform (Box-Muller) are both fully specified, so identical
/// seeds give bit-identical draw sequences on any platform or language port.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform draw in (0,1) with 53-bit resolution; never returns 0 or 1.
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
  }

  /// Standard normal via Box-Muller; one spare is cached per pair.
  double normal();

  /// Uniform index in [0, n) without modulo bias.
  std::size_t uniform_index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace steinflow
