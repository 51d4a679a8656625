#ifndef MCAE_RNG_HPP
#define MCAE_RNG_HPP

#include <cstdint>

namespace mcae {

// Counter-based generator built on the splitmix64 output function, chosen so
// that a reimplementation in any language can match streams bit for bit.
//
// Algorithm (all arithmetic mod 2^64):
//   output(seed, i)  = finalize(seed + i * 0x9E3779B97F4A7C15)
//   finalize(z): z ^= z >> 30; z *= 0xBF58476D1E3564ED;
//                z ^= z >> 27; z *= 0x94D049BB133111EB;
//                z ^= z >> 31; return z
// The generator holds (seed, counter) and emits output(seed, ++counter).
//
// Substreams: stream(k) yields an independent generator with
//   seed' = finalize((seed ^ 0xBF58476D1E3564ED) + (k + 1) * 0xD1342543DE82EF95)
//
// Doubles: uniform() = ((output >> 11) + 1) * 2^-53, in (0, 1].
// Normals: Box-Muller on consecutive uniform pairs (u1, u2):
//   r = sqrt(-2 ln u1); first = r cos(2 pi u2); second = r sin(2 pi u2).
// The second value of each pair is cached and returned by the next call.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  double uniform();
  double normal();

  /// Independent substream; deterministic in (seed, k).
  CounterRng stream(std::uint64_t k) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  /// Restore an exact cursor (used by training checkpoints).
  void restore(std::uint64_t counter, bool has_spare, double spare) {
    counter_ = counter;
    has_spare_ = has_spare;
    spare_ = spare;
  }
  bool has_spare() const { return has_spare_; }
  double spare() const { return spare_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mcae

#endif
