#pragma once

#include <cmath>
#include <cstdint>

namespace swahr {

// splitmix64 generator. Small and stable across platforms and standard
// libraries, which keeps seeded scenes and fits byte-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53 mantissa bits
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; the spare is cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Deterministic derived stream, e.g. one sub-seed per jitter resample.
inline uint64_t mix_seed(uint64_t base, uint64_t salt) {
  Rng r(base ^ (0x632be59bd9b4e019ull + salt * 0x9e3779b97f4a7c15ull));
  return r.next();
}

}  // namespace swahr
