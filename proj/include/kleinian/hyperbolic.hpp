#pragma once
//
// Upper half-plane model of H^2: points, boundary points, PSL(2,R) isometries,
// distances, Busemann cocycles and shadows. Angular quantities on the boundary
// are measured in the Poincare disk obtained by sending a viewpoint to the
// disk center; the canonical viewpoint is i.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>

#include "kleinian/errors.hpp"

namespace kleinian {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle to [0, 2*pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

/// A point of the upper half-plane.
class Point {
 public:
  /// The point i.
  constexpr Point() = default;

  Point(double re, double im) : re_(re), im_(im) {
    if (!std::isfinite(re) || !std::isfinite(im) || !(im > 0.0)) {
      throw InvalidArgument("point must have finite coordinates and im > 0");
    }
  }

  explicit Point(std::complex<double> z) : Point(z.real(), z.imag()) {}

  static constexpr Point i() { return Point{}; }

  double re() const { return re_; }
  double im() const { return im_; }
  std::complex<double> z() const { return {re_, im_}; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  double re_ = 0.0;
  double im_ = 1.0;
};

inline std::ostream& operator<<(std::ostream& os, const Point& p) {
  return os << p.re() << (p.im() < 0 ? "" : "+") << p.im() << "i";
}

/// A point of R u {inf}.
class BoundaryPoint {
 public:
  static BoundaryPoint at(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("finite boundary coordinate expected");
    return BoundaryPoint(x, false);
  }
  static BoundaryPoint infinity() { return BoundaryPoint(0.0, true); }

  bool is_infinite() const { return infinite_; }
  double value() const {
    if (infinite_) throw InvalidArgument("boundary point is infinite");
    return value_;
  }

  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;

 private:
  BoundaryPoint(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

inline std::ostream& operator<<(std::ostream& os, const BoundaryPoint& p) {
  if (p.is_infinite()) return os << "inf";
  return os << p.value();
}

/// An element of PSL(2,R). The matrix is scaled to determinant one and its
/// sign fixed so that the first nonzero entry among (a, b, c) is positive;
/// M and -M therefore construct the same value.
class Isometry {
 public:
  /// Identity.
  Isometry() = default;

  Isometry(double a, double b, double c, double d) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d)) {
      throw InvalidArgument("isometry entries must be finite");
    }
    const double det = a * d - b * c;
    if (!(det > 0.0)) throw InvalidArgument("isometry needs a positive determinant");
    const double k = 1.0 / std::sqrt(det);
    a_ = a * k;
    b_ = b * k;
    c_ = c * k;
    d_ = d * k;
    fix_sign();
  }

  static Isometry identity() { return {}; }

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }
  double trace() const { return a_ + d_; }
  double determinant() const { return a_ * d_ - b_ * c_; }

  Isometry inverse() const { return raw(d_, -b_, -c_, a_); }

  friend Isometry operator*(const Isometry& l, const Isometry& r) {
    return raw(l.a_ * r.a_ + l.b_ * r.c_, l.a_ * r.b_ + l.b_ * r.d_,
               l.c_ * r.a_ + l.d_ * r.c_, l.c_ * r.b_ + l.d_ * r.d_);
  }

  Isometry pow(long n) const {
    Isometry base = n < 0 ? inverse() : *this;
    unsigned long e = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    Isometry out;
    while (e != 0) {
      if (e & 1UL) out = out * base;
      base = base * base;
      e >>= 1;
    }
    return out;
  }

  /// Frobenius distance to the closer of +I and -I.
  double distance_from_identity() const {
    const double plus = std::hypot(a_ - 1.0, b_, c_);
    const double p = std::sqrt(plus * plus + (d_ - 1.0) * (d_ - 1.0));
    const double minus = std::hypot(a_ + 1.0, b_, c_);
    const double m = std::sqrt(minus * minus + (d_ + 1.0) * (d_ + 1.0));
    return std::min(p, m);
  }

  bool is_identity(double tol = 1e-9) const { return distance_from_identity() <= tol; }

  /// Entrywise maximum difference, sign-independent.
  double max_entry_difference(const Isometry& o) const {
    auto diff = [&](double s) {
      return std::max({std::abs(a_ - s * o.a_), std::abs(b_ - s * o.b_),
                       std::abs(c_ - s * o.c_), std::abs(d_ - s * o.d_)});
    };
    return std::min(diff(1.0), diff(-1.0));
  }

  friend bool operator==(const Isometry&, const Isometry&) = default;

 private:
  static Isometry raw(double a, double b, double c, double d) {
    Isometry m;
    m.a_ = a;
    m.b_ = b;
    m.c_ = c;
    m.d_ = d;
    m.fix_sign();
    return m;
  }

  void fix_sign() {
    const double lead = a_ != 0.0 ? a_ : (b_ != 0.0 ? b_ : c_);
    if (lead < 0.0) {
      a_ = -a_;
      b_ = -b_;
      c_ = -c_;
      d_ = -d_;
    }
  }

  double a_ = 1.0;
  double b_ = 0.0;
  double c_ = 0.0;
  double d_ = 1.0;
};

inline std::ostream& operator<<(std::ostream& os, const Isometry& g) {
  return os << "[[" << g.a() << ", " << g.b() << "], [" << g.c() << ", " << g.d() << "]]";
}

/// Hyperbolic distance, 2 asinh(|x - y| / (2 sqrt(im x im y))).
inline double distance(const Point& x, const Point& y) {
  const double chord = std::abs(x.z() - y.z());
  const double scale = 2.0 * std::sqrt(x.im() * y.im());
#ifdef KLEINIAN_MUTATE_DISTANCE
  // Deliberately wrong formula; only used to build the mutation-sanity harness.
  return std::asinh(chord / scale);
#else
  return 2.0 * std::asinh(chord / scale);
#endif
}

/// Mobius action z -> (a z + b) / (c z + d).
inline Point apply(const Isometry& g, const Point& x) {
  const std::complex<double> z = x.z();
  const std::complex<double> den = g.c() * z + g.d();
  const std::complex<double> w = (g.a() * z + g.b()) / den;
  return Point(w.real(), x.im() / std::norm(den));
}

/// Action on R u {inf}; the pole c xi + d = 0 goes to infinity.
inline BoundaryPoint apply_boundary(const Isometry& g, const BoundaryPoint& xi) {
  if (xi.is_infinite()) {
    if (g.c() == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint::at(g.a() / g.c());
  }
  const double x = xi.value();
  const double den = g.c() * x + g.d();
  if (den == 0.0) return BoundaryPoint::infinity();
  const double v = (g.a() * x + g.b()) / den;
  if (!std::isfinite(v)) return BoundaryPoint::infinity();
  return BoundaryPoint::at(v);
}

enum class Classification { identity, elliptic, parabolic, hyperbolic };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::identity: return "identity";
    case Classification::elliptic: return "elliptic";
    case Classification::parabolic: return "parabolic";
    case Classification::hyperbolic: return "hyperbolic";
  }
  return "?";
}

inline Classification classify(const Isometry& g, double tol = 1e-9) {
  if (g.is_identity(tol)) return Classification::identity;
  const double t = std::abs(g.trace());
  if (t < 2.0 - tol) return Classification::elliptic;
  if (t <= 2.0 + tol) return Classification::parabolic;
  return Classification::hyperbolic;
}

/// Hyperbolic: attracting and repelling points. Parabolic: only `attracting` is
/// meaningful and `repelling` equals it.
struct FixedPoints {
  BoundaryPoint attracting = BoundaryPoint::infinity();
  BoundaryPoint repelling = BoundaryPoint::infinity();
  bool parabolic = false;
};

inline FixedPoints fixed_points(const Isometry& g) {
  const Classification kind = classify(g);
  if (kind == Classification::identity || kind == Classification::elliptic) {
    throw InvalidArgument(std::string("no boundary fixed points for ") + to_string(kind) +
                          " element");
  }
  const double a = g.a(), b = g.b(), c = g.c(), d = g.d();
  FixedPoints fp;
  fp.parabolic = kind == Classification::parabolic;
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  if (std::abs(c) <= 1e-15 * scale) {
    // z -> (a z + b) / d fixes infinity.
    if (fp.parabolic) return fp;
    const BoundaryPoint finite = BoundaryPoint::at(b / (d - a));
    if (std::abs(a) > std::abs(d)) {
      fp.repelling = finite;
    } else {
      fp.attracting = finite;
    }
    return fp;
  }
  if (fp.parabolic) {
    fp.attracting = fp.repelling = BoundaryPoint::at((a - d) / (2.0 * c));
    return fp;
  }
  // c xi^2 + (d - a) xi - b = 0; derivative at a fixed point is 1 / (c xi + d)^2.
  const double disc = std::sqrt((a + d) * (a + d) - 4.0);
  const double r1 = ((a - d) + disc) / (2.0 * c);
  const double r2 = ((a - d) - disc) / (2.0 * c);
  if (std::abs(c * r1 + d) > std::abs(c * r2 + d)) {
    fp.attracting = BoundaryPoint::at(r1);
    fp.repelling = BoundaryPoint::at(r2);
  } else {
    fp.attracting = BoundaryPoint::at(r2);
    fp.repelling = BoundaryPoint::at(r1);
  }
  return fp;
}

/// Displacement along the axis of a hyperbolic element, 2 acosh(|tr| / 2).
inline double translation_length(const Isometry& g) {
  const double t = std::abs(g.trace());
  return t <= 2.0 ? 0.0 : 2.0 * std::acosh(t / 2.0);
}

/// B_xi(x1, x2) = lim_{z -> xi} d(x1, z) - d(x2, z).
inline double busemann(const BoundaryPoint& xi, const Point& x1, const Point& x2) {
  if (xi.is_infinite()) return std::log(x2.im() / x1.im());
  // Conjugating xi to infinity by z -> -1 / (z - xi) gives im(z) / |z - xi|^2.
  const double t = xi.value();
  const double h1 = x1.im() / std::norm(x1.z() - t);
  const double h2 = x2.im() / std::norm(x2.z() - t);
  return std::log(h2 / h1);
}

// --- disk-model helpers -----------------------------------------------------

/// Image of p in the disk model centered at `view`.
inline std::complex<double> to_disk(const Point& view, const Point& p) {
  const std::complex<double> w = (p.z() - view.re()) / view.im();
  const std::complex<double> I(0.0, 1.0);
  return (w - I) / (w + I);
}

inline Point from_disk(const Point& view, std::complex<double> w) {
  const std::complex<double> I(0.0, 1.0);
  const std::complex<double> one(1.0, 0.0);
  const std::complex<double> den = one - w;
  const std::complex<double> h = I * (one + w) / den;
  const double im = (1.0 - std::norm(w)) / std::norm(den);
  return Point(view.re() + view.im() * h.real(), view.im() * im);
}

/// Angle of a boundary point in the disk centered at `view`, in [0, 2*pi).
inline double angle_at(const Point& view, const BoundaryPoint& xi) {
  if (xi.is_infinite()) return 0.0;
  const double x = (xi.value() - view.re()) / view.im();
  return wrap_angle(std::atan2(-2.0 * x, x * x - 1.0));
}

inline double angle_of(const BoundaryPoint& xi) { return angle_at(Point::i(), xi); }

/// Inverse of angle_at.
inline BoundaryPoint boundary_at_angle(const Point& view, double theta) {
  const double half = wrap_angle(theta) / 2.0;
  const double s = std::sin(half);
  if (std::abs(s) < 1e-300) return BoundaryPoint::infinity();
  const double x = -std::cos(half) / s;
  const double v = view.re() + view.im() * x;
  if (!std::isfinite(v)) return BoundaryPoint::infinity();
  return BoundaryPoint::at(v);
}

/// Endpoint of the geodesic ray from `from` through `to`.
inline BoundaryPoint direction(const Point& from, const Point& to) {
  const std::complex<double> w = to_disk(from, to);
  if (std::abs(w) == 0.0) return BoundaryPoint::infinity();
  return boundary_at_angle(from, std::arg(w));
}

/// Direction angle of `to` seen from `from`, in [0, 2*pi); 0 when to == from.
inline double direction_angle(const Point& from, const Point& to) {
  const std::complex<double> w = to_disk(from, to);
  if (std::abs(w) == 0.0) return 0.0;
  return wrap_angle(std::arg(w));
}

// --- arcs -------------------------------------------------------------------

/// A counterclockwise arc of raw angles [start, start + width].
struct AngularArc {
  double start = 0.0;
  double width = kTwoPi;

  bool full() const { return width >= kTwoPi; }

  bool contains(double theta) const {
    if (full()) return true;
    return wrap_angle(theta - start) <= width;
  }

  double end() const { return start + width; }
  double mid() const { return wrap_angle(start + width / 2.0); }

  /// Measure of the intersection.
  double overlap(const AngularArc& o) const {
    if (full()) return std::min(o.width, kTwoPi);
    if (o.full()) return width;
    const double off = wrap_angle(o.start - start);
    const double first = std::max(0.0, std::min(width, off + o.width) - off);
    const double wrapped = std::max(0.0, std::min(width, off + o.width - kTwoPi));
    return first + wrapped;
  }

  /// Angular gap between disjoint arcs; minus the overlap when they intersect.
  double gap(const AngularArc& o) const {
    const double ov = overlap(o);
    if (ov > 0.0 || full() || o.full()) return -ov;
    const double g1 = wrap_angle(o.start - end());
    const double g2 = wrap_angle(start - o.end());
    return std::min(g1, g2);
  }

  /// Distance by which `inner` sits inside this arc (negative if it pokes out).
  double inner_slack(const AngularArc& inner) const {
    if (full()) return inner.full() ? 0.0 : kTwoPi;
    if (inner.full()) return -kTwoPi;
    const double off = wrap_angle(inner.start - start);
    return std::min(off, width - off - inner.width);
  }
};

/// A connected arc of the boundary circle, stored by its canonical angles
/// (viewpoint i) and read counterclockwise from lo to hi.
class BoundaryInterval {
 public:
  /// Whole boundary.
  BoundaryInterval() = default;

  static BoundaryInterval full() { return {}; }

  static BoundaryInterval from_angles(double start, double width) {
    if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(start)) {
      throw InvalidArgument("arc width must be positive");
    }
    BoundaryInterval out;
    out.arc_ = {wrap_angle(start), std::min(width, kTwoPi)};
    return out;
  }

  /// Counterclockwise from lo to hi; for finite lo < hi this is [lo, hi] and
  /// lo > hi wraps through infinity.
  static BoundaryInterval from_points(const BoundaryPoint& lo, const BoundaryPoint& hi) {
    const double a = angle_of(lo);
    const double w = wrap_angle(angle_of(hi) - a);
    if (!(w > 0.0)) throw InvalidArgument("arc endpoints coincide");
    return from_angles(a, w);
  }

  bool is_full() const { return arc_.full(); }
  double start_angle() const { return arc_.start; }
  double width() const { return arc_.width; }
  double normalized_length() const { return arc_.width / kTwoPi; }
  const AngularArc& arc() const { return arc_; }

  BoundaryPoint lo() const { return boundary_at_angle(Point::i(), arc_.start); }
  BoundaryPoint hi() const { return boundary_at_angle(Point::i(), arc_.end()); }
  BoundaryPoint midpoint() const { return boundary_at_angle(Point::i(), arc_.mid()); }

  bool contains(const BoundaryPoint& xi) const { return arc_.contains(angle_of(xi)); }
  bool contains_angle(double theta) const { return arc_.contains(theta); }

  /// The same arc measured in the disk centered at `view`.
  AngularArc seen_from(const Point& view) const {
    if (is_full()) return {};
    const double a = angle_at(view, lo());
    const double b = angle_at(view, hi());
    double w = wrap_angle(b - a);
    if (w == 0.0) w = arc_.width >= std::numbers::pi ? kTwoPi : 0.0;
    return {a, w};
  }

  /// Image under an isometry (orientation preserving, so endpoints map to endpoints).
  BoundaryInterval image(const Isometry& g) const {
    if (is_full()) return full();
    const double a = angle_of(apply_boundary(g, lo()));
    const double b = angle_of(apply_boundary(g, hi()));
    double w = wrap_angle(b - a);
    if (w == 0.0) w = arc_.width >= std::numbers::pi ? kTwoPi : 1e-300;
    return from_angles(a, w);
  }

  /// Complementary arc (closure ignored).
  BoundaryInterval complement() const {
    if (is_full()) throw InvalidArgument("complement of the full circle is empty");
    return from_angles(arc_.end(), kTwoPi - arc_.width);
  }

  double gap(const BoundaryInterval& o) const { return arc_.gap(o.arc_); }
  double inner_slack(const BoundaryInterval& inner) const { return arc_.inner_slack(inner.arc_); }

 private:
  AngularArc arc_{};
};

/// Boundary points xi such that the geodesic ray [x, xi) meets the closed
/// ball B(y, r). Full boundary when d(x, y) <= r.
inline BoundaryInterval shadow(const Point& x, const Point& y, double r) {
  if (!(r > 0.0)) throw InvalidArgument("shadow radius must be positive");
  const double d = distance(x, y);
  if (d <= r) return BoundaryInterval::full();
  // Right triangle (x, tangent point, y): sin(half) = sinh r / sinh d.
  const double half = std::asin(std::min(1.0, std::sinh(r) / std::sinh(d)));
  const double phi = direction_angle(x, y);
  const BoundaryPoint lo = boundary_at_angle(x, phi - half);
  const BoundaryPoint hi = boundary_at_angle(x, phi + half);
  const double a = angle_of(lo);
  const double w = wrap_angle(angle_of(hi) - a);
  if (!(w > 0.0)) return BoundaryInterval::from_angles(a, 1e-300);
  return BoundaryInterval::from_angles(a, w);
}

}  // namespace kleinian

template <>
struct std::hash<kleinian::Isometry> {
  std::size_t operator()(const kleinian::Isometry& g) const noexcept {
    std::size_t h = std::hash<double>{}(g.a());
    for (double v : {g.b(), g.c(), g.d()}) {
      h ^= std::hash<double>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};
