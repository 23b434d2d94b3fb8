#ifndef AWP_RNG_HPP
#define AWP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace awp {

// splitmix64, used both as a stream-derivation hash and as the generator
// core. Portable and bit-reproducible across platforms, which the
// determinism contract requires (std::discrete_distribution is not).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a261214289bbULL;
  return z ^ (z >> 31);
}

// A cheap splittable stream generator. Streams derived with distinct id
// chains are independent of each other and of the order they are used in.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // burn-in so that small seeds do not produce correlated first draws
    splitmix64(state_);
  }

  // Derive a child stream from this stream's seed and an id, without
  // consuming any state of the parent.
  Rng split(std::uint64_t id) const {
    std::uint64_t s = seed_mix(state_, id);
    return Rng(s);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // modulo bias is negligible for the small n used here
    return next_u64() % n;
  }

  // standard normal via Box-Muller
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  // Gumbel(0,1)
  double next_gumbel() {
    double u = next_double();
    while (u <= 0.0) u = next_double();
    return -std::log(-std::log(u));
  }

 private:
  static std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
    splitmix64(s);
    return s ^ b;
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace awp

#endif  // AWP_RNG_HPP
