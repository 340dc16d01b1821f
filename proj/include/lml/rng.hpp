#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lml {

// mt19937_64 produces a bit-exact sequence on every conforming platform; the
// standard library *distributions* do not. Streams must be reproducible from
// their seed, so the uniform/normal transforms are pinned here instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); rejection sampling, no modulo bias.
  int uniform_int(int n) {
    const auto un = static_cast<uint64_t>(n);
    const uint64_t bound = UINT64_MAX - UINT64_MAX % un;
    uint64_t x = gen_();
    while (x >= bound) x = gen_();
    return static_cast<int>(x % un);
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// splitmix64 finalizer; derives independent per-item seeds (class index,
// tensor index, ...) from one run seed.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 0x2545f4914f6cdd1dull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace lml
