#pragma once

#include <array>
#include <cstdint>

namespace pgdqn {

// xoshiro256** seeded through splitmix64. Identical seeds give identical
// streams on every platform; unit tests pin reference outputs.
class Prng {
 public:
  explicit Prng(std::uint64_t seed);
  Prng(std::uint64_t seed, std::uint64_t stream);  // independent substream

  std::uint64_t next_u64();
  double uniform01();                      // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);
  std::uint64_t below(std::uint64_t n);    // unbiased integer in [0, n)
  double normal();                         // standard normal, Box-Muller

  std::array<std::uint64_t, 4> state() const { return s_; }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace pgdqn
