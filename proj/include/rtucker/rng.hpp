#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rtucker {

// Seeded generator with explicitly-coded distributions (Box-Muller normal,
// Marsaglia-Tsang gamma) so that a given seed always yields the same stream,
// independent of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [0, 1): strictly positive variant for logs.
  double uniform_pos() {
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return u;
  }

  std::int64_t uniform_index(std::int64_t n) {
    // Rejection keeps the draw exactly uniform over [0, n).
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t v;
    do { v = engine_(); } while (v >= limit);
    return static_cast<std::int64_t>(v % un);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  double student_t(double nu) {
    const double z = normal();
    const double chi2 = 2.0 * gamma(nu / 2.0);
    return z / std::sqrt(chi2 / nu);
  }

  // |x| ~ Pareto(shape, scale), sign Rademacher.
  double pareto_symmetric(double shape, double scale) {
    const double mag = scale * std::pow(uniform_pos(), -1.0 / shape);
    return uniform() < 0.5 ? mag : -mag;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rtucker
