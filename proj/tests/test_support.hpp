#pragma once
// Hand-rolled generators shared by the property tests.

#include <cmath>
#include <complex>
#include <random>

#include "kleinian/hyperbolic.hpp"

namespace testsupport {

using kleinian::BoundaryPoint;
using kleinian::Isometry;
using kleinian::Point;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }

  /// Points with log-uniform height in [e^-2, e^2] and |re| <= 3.
  Point point() { return Point(uniform(-3.0, 3.0), std::exp(uniform(-2.0, 2.0))); }

  BoundaryPoint boundary() {
    if (integer(0, 19) == 0) return BoundaryPoint::infinity();
    return BoundaryPoint::at(uniform(-5.0, 5.0));
  }

  /// Random element of moderate size: a translation-dilation followed by a
  /// rotation about i.
  Isometry isometry() {
    const double t = uniform(0.0, 2.0 * M_PI);
    const Isometry rot(std::cos(t / 2.0), std::sin(t / 2.0), -std::sin(t / 2.0), std::cos(t / 2.0));
    const double k = std::exp(uniform(-1.5, 1.5));
    const Isometry aff(k, uniform(-2.0, 2.0), 0.0, 1.0 / k);
    return rot * aff;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Length of the geodesic arc from x to y by numerical integration of |dz| / im z.
inline double geodesic_length_by_quadrature(const Point& x, const Point& y, int steps = 20000) {
  auto simpson = [&](auto f, double a, double b) {
    const double h = (b - a) / steps;
    double s = f(a) + f(b);
    for (int k = 1; k < steps; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  if (std::abs(x.re() - y.re()) < 1e-12) {
    return std::abs(simpson([](double t) { return 1.0 / t; }, x.im(), y.im()));
  }
  // Circle centered on the real axis through x and y.
  const double c = (std::norm(x.z()) - std::norm(y.z())) / (2.0 * (x.re() - y.re()));
  const double t0 = std::arg(x.z() - c);
  const double t1 = std::arg(y.z() - c);
  return std::abs(simpson([](double t) { return 1.0 / std::sin(t); }, t0, t1));
}

}  // namespace testsupport
