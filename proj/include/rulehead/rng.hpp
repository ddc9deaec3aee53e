#ifndef RULEHEAD_RNG_HPP
#define RULEHEAD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace rulehead {

// Deterministic random source. Distributions are hand-rolled on top of
// mt19937_64 so results are identical across standard libraries, which the
// seed-reproducibility guarantees depend on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  int below(int n) {
    return static_cast<int>(next() % static_cast<std::uint64_t>(n));
  }

  // Uniform double in [0, 1).
  double uniform() {
    return std::ldexp(static_cast<double>(next() >> 11), -53);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool chance(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[static_cast<size_t>(
                                  next() % static_cast<std::uint64_t>(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rulehead

#endif  // RULEHEAD_RNG_HPP
