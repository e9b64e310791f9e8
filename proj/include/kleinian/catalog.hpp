#pragma once
// Built-in groups used by the acceptance suite and the sample configs.

#include <cmath>

#include "kleinian/groups.hpp"

namespace kleinian::catalog {

/// z -> z + 1.
inline Isometry parabolic_generator() { return Isometry(1.0, 1.0, 0.0, 1.0); }

/// Translation length `ell` along the imaginary axis.
inline Isometry axial_hyperbolic(double ell) {
  return Isometry(std::exp(ell / 2.0), 0.0, 0.0, std::exp(-ell / 2.0));
}

/// diag(lambda, 1/lambda).
inline Isometry schottky_a(double lambda = 4.0) { return Isometry(lambda, 0.0, 0.0, 1.0 / lambda); }

/// Same translation length as schottky_a, axis the unit circle through -1 and 1.
inline Isometry schottky_b(double lambda = 4.0) {
  const double p = (lambda + 1.0 / lambda) / 2.0;
  const double q = (1.0 / lambda - lambda) / 2.0;
  return Isometry(p, q, q, p);
}

inline GroupSpec parabolic() { return GroupSpec::cyclic(parabolic_generator()); }
inline GroupSpec cyclic_hyperbolic() { return GroupSpec::cyclic(axial_hyperbolic(1.0)); }
inline GroupSpec lattice() { return GroupSpec::modular_lattice(); }
inline GroupSpec schottky(double lambda = 4.0) {
  return GroupSpec::schottky({schottky_a(lambda), schottky_b(lambda)});
}
inline GroupSpec nested(int depth = 4) {
  return GroupSpec::nested_subgroup(schottky_a(), schottky_b(), depth);
}
inline GroupSpec nested_conjugate(int depth = 4) { return conjugate(nested(depth), schottky_a()); }

}  // namespace kleinian::catalog
