#ifndef QTRAJ_RNG_HPP
#define QTRAJ_RNG_HPP

#include <cstdint>
#include <random>

namespace qtraj {

/// Seeded deterministic generator. The algorithm (mt19937_64 with the 53-bit
/// uniform mapping below) is pinned so recorded runs replay bit-exactly on
/// every platform; std::uniform_real_distribution is implementation-defined
/// and deliberately avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qtraj

#endif
