#ifndef DBARW_RNG_HPP
#define DBARW_RNG_HPP

#include <cstdint>
#include <random>

namespace dbarw {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// mt19937_64 seeded with splitmix64(seed). Replica streams use seed XOR
/// replica index.  Uniform and exponential transforms are fixed here so that
/// event logs do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  static Rng for_replica(std::uint64_t seed, std::uint64_t replica) { return Rng(seed ^ replica); }

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Exponential with the given rate (> 0).
  double exponential(double rate);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace dbarw

#endif  // DBARW_RNG_HPP
