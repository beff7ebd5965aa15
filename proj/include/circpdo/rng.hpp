#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace circpdo {

// Deterministic random source. std::mt19937_64 output is fixed by the
// standard; the transforms below avoid std::uniform_real_distribution and
// std::normal_distribution, whose exact output is implementation defined.
// Reports quote seeds, so identical seeds must give identical streams.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1), 53 bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // standard normal, Box-Muller with cached second member
  double gaussian();

  std::complex<double> cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

  // integer in [0, n); modulo bias is irrelevant at test-suite scale
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

  int range(int lo, int hi) {  // inclusive ends
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace circpdo
