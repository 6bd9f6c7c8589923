#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace actgen {

// Deterministic RNG used everywhere randomness appears (init, noise, shuffles).
// The distribution transforms are implemented here instead of relying on
// std::*_distribution, whose output sequences are implementation-defined:
// checkpoints and dataset files have to be byte-reproducible for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_seed_(seed), gen_(seed) {}

  // Uniform double in [0, 1), 53 bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the Marsaglia polar method (one spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Unbiased integer in [0, n).
  std::uint64_t integer(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::integer: n must be positive");
    const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
    const std::uint64_t usable = 0 - rem;
    std::uint64_t r;
    do {
      r = gen_();
    } while (usable != 0 && r >= usable);
    return r % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[integer(i)]);
    }
  }

  // Independent stream for a sub-purpose; stable in (seed, salt).
  Rng derive(std::uint64_t salt) const {
    return Rng(splitmix64(base_seed_ + 0x9E3779B97F4A7C15ull * (salt + 1)));
  }

  std::uint64_t base_seed() const { return base_seed_; }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t base_seed_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace actgen
