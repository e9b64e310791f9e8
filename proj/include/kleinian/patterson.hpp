#pragma once
//
// Truncated orbital measures sum exp(-s d(x, g y)) h(d(x, g y)) delta_{g y},
// their conformality and equivariance audits, shadow statistics, radial
// limit points and a deterministic density rasterizer.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kleinian/counting.hpp"
#include "kleinian/errors.hpp"
#include "kleinian/groups.hpp"
#include "kleinian/hyperbolic.hpp"
#include "kleinian/sequences.hpp"

namespace kleinian {

/// Gauge h(t) = (1 + t)^beta; beta = 0 is the unit gauge. Satisfies
/// h(t + s) <= h(t) e^{eta s} for t >= beta / eta.
struct ModifierH {
  double beta = 0.0;

  static ModifierH unit() { return {0.0}; }
  static ModifierH polynomial(double beta) {
    if (!(beta >= 0.0)) throw InvalidArgument("gauge exponent must be >= 0");
    return {beta};
  }
  bool is_unit() const { return beta == 0.0; }
  double log_value(double t) const { return beta == 0.0 ? 0.0 : beta * std::log1p(t); }
  double operator()(double t) const { return std::exp(log_value(t)); }
  friend bool operator==(const ModifierH&, const ModifierH&) = default;
};

struct Atom {
  Point location;
  double log_weight = 0.0;     // normalized
  double distance = 0.0;       // d(basepoint, location)
  double view_angle = 0.0;     // direction from the basepoint, disk centered there
  double boundary_angle = 0.0; // same direction as a canonical boundary angle
  long word_length = 0;
  std::size_t census_index = 0;
  double weight() const { return std::exp(log_weight); }
};

/// Finite atomic approximation of a conformal density, seen from `basepoint`
/// and normalized by the truncated series at the census basepoint o.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  AtomicMeasure(Point basepoint, Point y, double s, ModifierH h, double log_normalizer,
                std::size_t truncation, std::vector<Atom> atoms)
      : basepoint_(basepoint), y_(y), s_(s), h_(h), log_normalizer_(log_normalizer),
        truncation_(truncation), atoms_(std::move(atoms)) {}

  const Point& basepoint() const { return basepoint_; }
  const Point& y() const { return y_; }
  double s() const { return s_; }
  const ModifierH& h() const { return h_; }
  double log_normalizer() const { return log_normalizer_; }
  std::size_t truncation() const { return truncation_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  double total_mass() const {
    NeumaierSum sum;
    for (const Atom& a : atoms_) sum.add(a.weight());
    return sum.value();
  }

 private:
  Point basepoint_;
  Point y_;
  double s_ = 0.0;
  ModifierH h_;
  double log_normalizer_ = 0.0;
  std::size_t truncation_ = 0;
  std::vector<Atom> atoms_;
};

/// ln P'(o, y, s) over the census (o = census.x()), ascending in distance.
inline double log_modified_series(const OrbitCensus& census, double s, const ModifierH& h) {
  std::vector<double> logs;
  logs.reserve(census.size());
  for (const CensusEntry& e : census.entries()) logs.push_back(-s * e.distance + h.log_value(e.distance));
  return log_sum_exp(logs);
}

/// Atoms at g y weighted exp(-s d(x, g y)) h(d(x, g y)) / P'(o, y, s).
inline AtomicMeasure orbital_measure(const OrbitCensus& census, double s, const Point& x,
                                     const ModifierH& h = ModifierH::unit()) {
  if (census.empty()) throw InvalidArgument("empty census");
  const double log_norm = log_modified_series(census, s, h);
  if (!(log_norm >= std::log(1e-300))) {
    throw DegenerateNormalizer("truncated normalizer below 1e-300");
  }
  const Point& y = census.y();
  std::vector<Atom> atoms;
  atoms.reserve(census.size());
  for (std::size_t k = 0; k < census.size(); ++k) {
    const CensusEntry& e = census.entries()[k];
    Atom a;
    a.location = apply(e.element, y);
    a.distance = distance(x, a.location);
    a.log_weight = -s * a.distance + h.log_value(a.distance) - log_norm;
    a.view_angle = direction_angle(x, a.location);
    a.boundary_angle = angle_of(boundary_at_angle(x, a.view_angle));
    a.word_length = e.word_length;
    a.census_index = k;
    atoms.push_back(a);
  }
  return AtomicMeasure(x, y, s, h, log_norm, census.size(), std::move(atoms));
}

inline AtomicMeasure orbital_measure(const OrbitCensus& census, double s,
                                     const ModifierH& h = ModifierH::unit()) {
  return orbital_measure(census, s, census.x(), h);
}

// --- conformality -----------------------------------------------------------

struct ConformalAudit {
  double max_deviation = 0.0;   // exact atom-ratio identity
  double max_far_gap = 0.0;     // Busemann gap over the farthest atoms
  double far_min_distance = 0.0;
  std::size_t far_count = 0;
};

/// Compares dmu_{x'}/dmu_x at each atom with exp(-s (d(x', g y) - d(x, g y)))
/// and, on the `far` farthest atoms, the distance difference with the
/// Busemann cocycle at the direction of g y seen from o.
inline ConformalAudit conformal_ratio_audit(const AtomicMeasure& mu_x, const AtomicMeasure& mu_xp,
                                            const Point& o, std::size_t far = 50) {
  if (mu_x.atoms().size() != mu_xp.atoms().size() || mu_x.s() != mu_xp.s() ||
      !(mu_x.y() == mu_xp.y()) || !mu_x.h().is_unit() || !mu_xp.h().is_unit() ||
      mu_x.log_normalizer() != mu_xp.log_normalizer()) {
    throw MismatchedConstruction("measures differ in census, s, y or gauge");
  }
  const double s = mu_x.s();
  const Point& x = mu_x.basepoint();
  const Point& xp = mu_xp.basepoint();
  ConformalAudit audit;
  std::vector<std::size_t> order(mu_x.atoms().size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Atom& a = mu_x.atoms()[k];
    const Atom& b = mu_xp.atoms()[k];
    if (!(a.location == b.location)) throw MismatchedConstruction("atom locations differ");
    // Unnormalized weights; the normalizers are shared and cancel.
    const double wa = std::exp(a.log_weight + mu_x.log_normalizer());
    const double wb = std::exp(b.log_weight + mu_xp.log_normalizer());
    const double expected = std::exp(-s * (distance(xp, a.location) - distance(x, a.location)));
    audit.max_deviation = std::max(audit.max_deviation, std::abs(wb / wa - expected));
  }
  const std::size_t n = std::min(far, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(n), order.end(),
                    [&](std::size_t i, std::size_t j) {
                      return distance(o, mu_x.atoms()[i].location) > distance(o, mu_x.atoms()[j].location);
                    });
  audit.far_min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const Point& p = mu_x.atoms()[order[k]].location;
    const double gap =
        std::abs((distance(xp, p) - distance(x, p)) - busemann(direction(o, p), xp, x));
    audit.max_far_gap = std::max(audit.max_far_gap, gap);
    audit.far_min_distance = std::min(audit.far_min_distance, distance(o, p));
  }
  audit.far_count = n;
  return audit;
}

// --- equivariance -----------------------------------------------------------

struct EquivarianceAudit {
  double max_discrepancy = 0.0;
  double leakage = 0.0;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

namespace detail {
using MatrixKey = std::tuple<long long, long long, long long, long long>;

inline MatrixKey integer_key(const Isometry& g) {
  return {std::llround(g.a()), std::llround(g.b()), std::llround(g.c()), std::llround(g.d())};
}
}  // namespace detail

/// Compares the pullback g0^* mu_{x,y} (atoms g0^-1 g y carrying the weight of
/// g y) with mu_{g0^-1 x, y}. Elements are matched by word, or by exact
/// integer matrix for the lattice. Unmatched mass on either side is leakage.
inline EquivarianceAudit equivariance_audit(const OrbitCensus& census, const Isometry& g0,
                                            const Word& g0_word, double s, const Point& x) {
  const AtomicMeasure mu = orbital_measure(census, s, x);
  const AtomicMeasure pulled_target = orbital_measure(census, s, apply(g0.inverse(), x));
  const auto& entries = census.entries();
  std::vector<long> partner(entries.size(), -1);  // index of g0^-1 g
  std::vector<char> hit(entries.size(), 0);
  if (census.has_words()) {
    std::map<Word, std::size_t> index;
    for (std::size_t k = 0; k < entries.size(); ++k) index.emplace(entries[k].word, k);
    const Word inv = g0_word.inverse();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto it = index.find(inv * entries[k].word);
      if (it != index.end()) partner[k] = static_cast<long>(it->second);
    }
  } else {
    std::map<detail::MatrixKey, std::size_t> index;
    for (std::size_t k = 0; k < entries.size(); ++k) index.emplace(detail::integer_key(entries[k].element), k);
    const Isometry inv = g0.inverse();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto it = index.find(detail::integer_key(inv * entries[k].element));
      if (it != index.end()) partner[k] = static_cast<long>(it->second);
    }
  }
  EquivarianceAudit audit;
  NeumaierSum leak;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double w = mu.atoms()[k].weight();
    if (partner[k] < 0) {
      leak.add(w);
      ++audit.unmatched;
      continue;
    }
    const std::size_t j = static_cast<std::size_t>(partner[k]);
    hit[j] = 1;
    audit.max_discrepancy = std::max(audit.max_discrepancy, std::abs(w - pulled_target.atoms()[j].weight()));
    ++audit.matched;
  }
  for (std::size_t j = 0; j < entries.size(); ++j) {
    if (!hit[j]) {
      leak.add(pulled_target.atoms()[j].weight());
      ++audit.unmatched;
    }
  }
  audit.leakage = leak.value();
  return audit;
}

// --- shadows ----------------------------------------------------------------

/// Atoms at distance >= horizon from the basepoint, sorted by boundary angle,
/// with prefix sums for arc queries.
class ShadowIndex {
 public:
  ShadowIndex(const AtomicMeasure& mu, double horizon) : horizon_(horizon) {
    std::vector<std::pair<double, double>> pts;
    for (const Atom& a : mu.atoms()) {
      if (a.distance >= horizon) pts.emplace_back(a.boundary_angle, a.weight());
    }
    std::sort(pts.begin(), pts.end());
    angles_.reserve(pts.size());
    prefix_.reserve(pts.size() + 1);
    prefix_.push_back(0.0L);
    long double acc = 0.0L;
    for (const auto& [ang, w] : pts) {
      angles_.push_back(ang);
      acc += static_cast<long double>(w);
      prefix_.push_back(acc);
    }
  }

  double horizon() const { return horizon_; }

  double mass(const BoundaryInterval& arc) const {
    if (arc.is_full()) return static_cast<double>(prefix_.back());
    const double a = arc.start_angle();
    const double b = a + arc.width();
    if (b < kTwoPi) return range(a, b);
    return range(a, kTwoPi) + range(0.0, b - kTwoPi);
  }

 private:
  // Mass of atoms with angle in [a, b].
  double range(double a, double b) const {
    const auto lo = std::lower_bound(angles_.begin(), angles_.end(), a);
    const auto hi = std::upper_bound(angles_.begin(), angles_.end(), b);
    if (hi <= lo) return 0.0;
    return static_cast<double>(prefix_[static_cast<std::size_t>(hi - angles_.begin())] -
                               prefix_[static_cast<std::size_t>(lo - angles_.begin())]);
  }

  double horizon_;
  std::vector<double> angles_;
  std::vector<long double> prefix_;
};

/// Mass of atoms whose direction from the basepoint lies in the arc and whose
/// distance from it is at least `horizon`.
inline double shadow_mass(const AtomicMeasure& mu, const BoundaryInterval& arc, double horizon) {
  NeumaierSum sum;
  for (const Atom& a : mu.atoms()) {
    if (a.distance >= horizon && arc.contains_angle(a.boundary_angle)) sum.add(a.weight());
  }
  return sum.value();
}

struct ShadowRecord {
  std::size_t census_index = 0;
  long word_length = 0;
  double distance = 0.0;
  double mass = 0.0;
  double ratio = 0.0;  // mass * exp(alpha * distance)
};

struct ShadowAudit {
  std::vector<ShadowRecord> records;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  bool radius_too_small = false;  // some shadow carried no mass
  double spread() const { return max_ratio / min_ratio; }
};

/// For census elements with word length in [min_len, max_len] (or, without
/// words, distance in [min_len, max_len]), the mass of the shadow
/// O_o(g o, r) times exp(alpha d(o, g o)). o is the measure basepoint.
inline ShadowAudit shadow_lemma_audit(const OrbitCensus& census, const AtomicMeasure& mu, double alpha,
                                      double r, long min_len, long max_len, double horizon) {
  const Point& o = mu.basepoint();
  const ShadowIndex index(mu, horizon);
  ShadowAudit audit;
  for (std::size_t k = 0; k < census.size(); ++k) {
    const CensusEntry& e = census.entries()[k];
    const bool in_band = census.has_words()
                             ? (e.word_length >= min_len && e.word_length <= max_len)
                             : (e.distance >= static_cast<double>(min_len) &&
                                e.distance <= static_cast<double>(max_len));
    if (!in_band) continue;
    const Point go = apply(e.element, o);
    ShadowRecord rec;
    rec.census_index = k;
    rec.word_length = e.word_length;
    rec.distance = distance(o, go);
    rec.mass = index.mass(shadow(o, go, r));
    rec.ratio = rec.mass * std::exp(alpha * rec.distance);
    if (rec.mass <= 0.0) {
      audit.radius_too_small = true;
    } else {
      audit.min_ratio = std::min(audit.min_ratio, rec.ratio);
    }
    audit.max_ratio = std::max(audit.max_ratio, rec.ratio);
    audit.records.push_back(rec);
  }
  if (audit.radius_too_small) audit.min_ratio = 0.0;
  return audit;
}

/// Largest number of arcs covering a common boundary point.
inline int arc_multiplicity(const std::vector<BoundaryInterval>& arcs) {
  int base = 0;
  std::vector<std::pair<double, int>> events;
  for (const BoundaryInterval& a : arcs) {
    if (a.is_full()) {
      ++base;
      continue;
    }
    const double s = a.start_angle();
    const double e = s + a.width();
    if (e >= kTwoPi) {
      ++base;  // covers angle 0
      events.emplace_back(s, +1);
      events.emplace_back(e - kTwoPi, -1);
    } else {
      events.emplace_back(s, +1);
      events.emplace_back(e, -1);
    }
  }
  // Closed arcs: openings before closings at equal angles.
  std::sort(events.begin(), events.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first < r.first : l.second > r.second;
  });
  int cur = base;
  int best = base;
  for (const auto& [ang, d] : events) {
    cur += d;
    best = std::max(best, cur);
  }
  return best;
}

struct CoverBand {
  double r_lo = 0.0;
  double r_hi = 0.0;
  long count = 0;
  double min_mass = 0.0;
  double mass_sum = 0.0;
  int multiplicity = 0;
  double total_mass = 0.0;
  bool holds = false;  // count * min_mass <= multiplicity * total_mass
};

/// For each radius band [R, R + width): the shadows O_o(g o, r) of census
/// elements in the band, their empirical multiplicity m and the counting bound
/// count * min mass <= sum of masses <= m * total mass.
inline std::vector<CoverBand> shadow_cover_bound(const OrbitCensus& census, const AtomicMeasure& mu,
                                                 double r, double r_lo, double r_hi, double width,
                                                 double horizon) {
  const Point& o = mu.basepoint();
  const ShadowIndex index(mu, horizon);
  const double total = index.mass(BoundaryInterval::full());
  std::vector<CoverBand> out;
  for (double lo = r_lo; lo + width <= r_hi + 1e-9; lo += width) {
    CoverBand band;
    band.r_lo = lo;
    band.r_hi = lo + width;
    band.total_mass = total;
    band.min_mass = std::numeric_limits<double>::infinity();
    std::vector<BoundaryInterval> arcs;
    NeumaierSum sum;
    for (const CensusEntry& e : census.entries()) {
      if (e.distance < lo || e.distance >= lo + width) continue;
      const BoundaryInterval arc = shadow(o, apply(e.element, o), r);
      const double m = index.mass(arc);
      arcs.push_back(arc);
      sum.add(m);
      band.min_mass = std::min(band.min_mass, m);
      ++band.count;
    }
    if (band.count == 0) band.min_mass = 0.0;
    band.mass_sum = sum.value();
    band.multiplicity = arc_multiplicity(arcs);
    band.holds = static_cast<double>(band.count) * band.min_mass <= band.mass_sum * (1 + 1e-12) &&
                 band.mass_sum <= static_cast<double>(band.multiplicity) * total * (1 + 1e-12);
    out.push_back(band);
  }
  return out;
}

// --- limit points -----------------------------------------------------------

struct LimitPoint {
  Word word;
  BoundaryPoint point;
  double angle = 0.0;
};

/// Boundary arc w_1 ... w_{k-1} (I(w_k)) coding the cylinder of the word.
inline BoundaryInterval word_interval(const PingPongCertificate& cert, const std::vector<Isometry>& letters,
                                      const std::vector<int>& word) {
  if (word.empty()) return BoundaryInterval::full();
  BoundaryInterval arc = cert.intervals[static_cast<std::size_t>(word.back())];
  for (std::size_t k = word.size() - 1; k-- > 0;) arc = arc.image(letters[static_cast<std::size_t>(word[k])]);
  return arc;
}

/// For each reduced word of length `depth`, the word applied to the midpoint
/// of its last letter's ping-pong arc; the point lies in word_interval(word).
inline std::vector<LimitPoint> radial_limit_points(const GroupSpec& spec, int depth) {
  if (spec.kind != GroupKind::schottky) throw InvalidArgument("limit points need a Schottky spec");
  if (depth < 1) throw InvalidArgument("depth must be >= 1");
  const PingPongCertificate cert = verify_ping_pong(spec.generators);
  const std::vector<Isometry> letters = letter_isometries(spec);
  const int n = static_cast<int>(letters.size());
  std::vector<LimitPoint> out;
  std::vector<int> word;
  std::function<void(const Isometry&)> rec = [&](const Isometry& g) {
    if (static_cast<int>(word.size()) == depth) {
      const BoundaryPoint mid = cert.intervals[static_cast<std::size_t>(word.back())].midpoint();
      const BoundaryPoint p = apply_boundary(g, mid);
      out.push_back({Word::from_letters(word), p, angle_of(p)});
      return;
    }
    for (int l = 0; l < n; ++l) {
      if (!word.empty() && l == letter_inverse(word.back())) continue;
      word.push_back(l);
      rec(g * letters[static_cast<std::size_t>(l)]);
      word.pop_back();
    }
  };
  rec(Isometry());
  return out;
}

// --- histograms -------------------------------------------------------------

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
};

/// Mass of atoms beyond `horizon` by direction angle in the disk centered at the basepoint.
inline std::vector<HistogramBin> boundary_histogram(const AtomicMeasure& mu, int bins, double horizon) {
  if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
  std::vector<NeumaierSum> sums(static_cast<std::size_t>(bins));
  for (const Atom& a : mu.atoms()) {
    if (a.distance < horizon) continue;
    int b = static_cast<int>(a.view_angle / kTwoPi * bins);
    b = std::clamp(b, 0, bins - 1);
    sums[static_cast<std::size_t>(b)].add(a.weight());
  }
  std::vector<HistogramBin> out;
  for (int b = 0; b < bins; ++b) {
    out.push_back({kTwoPi * b / bins, kTwoPi * (b + 1) / bins, sums[static_cast<std::size_t>(b)].value()});
  }
  return out;
}

/// Largest total-variation distance between consecutive normalized histograms.
inline double histogram_instability(const std::vector<std::vector<HistogramBin>>& hs) {
  double worst = 0.0;
  for (std::size_t k = 1; k < hs.size(); ++k) {
    double ta = 0.0, tb = 0.0;
    for (const HistogramBin& b : hs[k - 1]) ta += b.mass;
    for (const HistogramBin& b : hs[k]) tb += b.mass;
    if (ta <= 0.0 || tb <= 0.0) continue;
    double tv = 0.0;
    for (std::size_t i = 0; i < hs[k].size(); ++i) tv += std::abs(hs[k - 1][i].mass / ta - hs[k][i].mass / tb);
    worst = std::max(worst, tv / 2.0);
  }
  return worst;
}

// --- gauge neutrality -------------------------------------------------------

/// Exponential growth rate of N_h(R) / N(R), with N_h(R) = sum_{d <= R} h(d).
/// For a ball whose counts grow like e^{delta R} the distance of a uniform
/// element is roughly R - Exp(delta), so a slowly varying gauge makes the
/// ratio behave like (1 + R - 1/delta)^c. Fit on grid radii in [r_lo, r_hi]:
///   ln(N_h / N) ~ eps R + c ln(1 + R - 1/delta) + c0,
/// and return eps. `delta` is the exponent of the plain counts.
inline double gauge_ratio_rate(const OrbitCensus& census, const ModifierH& h, double delta, double r_lo,
                               double r_hi, double step = 0.5) {
  detail::require_complete(census, r_hi);
  if (!(delta > 0.0)) throw InvalidArgument("gauge fit needs a positive exponent");
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  std::vector<double> rs, ys;
  double log_n = kNegInf, log_h = kNegInf;
  std::size_t k = 0;
  const auto& e = census.entries();
  for (double R = r_lo; R <= r_hi + 1e-9; R += step) {
    while (k < e.size() && e[k].distance <= R) {
      log_n = log_add(log_n, 0.0);
      log_h = log_add(log_h, h.log_value(e[k++].distance));
    }
    if (log_n == kNegInf || 1.0 + R - 1.0 / delta <= 0.0) continue;
    rs.push_back(R);
    ys.push_back(log_h - log_n);
  }
  if (rs.size() < 4) throw InsufficientData("too few grid points for the gauge fit");
  // Normal equations for columns (R, ln(1 + R - 1/delta), 1).
  double A[3][3] = {}, b[3] = {};
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double row[3] = {rs[i], std::log(1.0 + rs[i] - 1.0 / delta), 1.0};
    for (int p = 0; p < 3; ++p) {
      b[p] += row[p] * ys[i];
      for (int q = 0; q < 3; ++q) A[p][q] += row[p] * row[q];
    }
  }
  // Gaussian elimination with partial pivoting.
  int perm[3] = {0, 1, 2};
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(A[perm[r]][c]) > std::abs(A[perm[piv]][c])) piv = r;
    }
    std::swap(perm[c], perm[piv]);
    const double d = A[perm[c]][c];
    if (d == 0.0) throw InsufficientData("singular gauge fit");
    for (int r = c + 1; r < 3; ++r) {
      const double f = A[perm[r]][c] / d;
      for (int q = c; q < 3; ++q) A[perm[r]][q] -= f * A[perm[c]][q];
      b[perm[r]] -= f * b[perm[c]];
    }
  }
  double x[3];
  for (int c = 2; c >= 0; --c) {
    double v = b[perm[c]];
    for (int q = c + 1; q < 3; ++q) v -= A[perm[c]][q] * x[q];
    x[c] = v / A[perm[c]][c];
  }
  return x[0];
}

/// Exponent of the modified series: the windowed estimate for the plain
/// counts plus the growth rate of N_h / N. Equals the plain estimate for h = 1.
inline double modified_series_exponent(const OrbitCensus& census, const ModifierH& h, double r_lo,
                                       double r_hi, double step = 0.5) {
  detail::require_complete(census, r_hi);
  const double delta = estimate_exponent(counting_report(census), std::make_pair(r_lo, r_hi)).point_estimate;
  if (h.is_unit()) return delta;
  return delta + gauge_ratio_rate(census, h, delta, r_lo, r_hi, step);
}

// --- rendering --------------------------------------------------------------

/// RGB raster of atom density in the disk centered at the basepoint: white
/// background, darker pixels carry more mass (log scale), thin gray unit circle.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

inline Raster render_density(const AtomicMeasure& mu, int size = 1024) {
  if (size < 8) throw InvalidArgument("raster too small");
  const std::size_t n = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  std::vector<double> acc(n, 0.0);
  const double half = size / 2.0;
  const double radius = half - 2.0;
  for (const Atom& a : mu.atoms()) {
    const std::complex<double> w = to_disk(mu.basepoint(), a.location);
    const int px = static_cast<int>(std::floor(half + radius * w.real()));
    const int py = static_cast<int>(std::floor(half - radius * w.imag()));
    if (px < 0 || py < 0 || px >= size || py >= size) continue;
    acc[static_cast<std::size_t>(py) * static_cast<std::size_t>(size) + static_cast<std::size_t>(px)] += a.weight();
  }
  double peak = 0.0;
  double floor_v = std::numeric_limits<double>::infinity();
  for (double v : acc) {
    if (v > 0.0) {
      peak = std::max(peak, v);
      floor_v = std::min(floor_v, v);
    }
  }
  Raster img{size, size, std::vector<std::uint8_t>(3 * n, 255)};
  const double span = peak > floor_v ? std::log(peak / floor_v) : 1.0;
  for (int py = 0; py < size; ++py) {
    for (int px = 0; px < size; ++px) {
      const std::size_t i = static_cast<std::size_t>(py) * static_cast<std::size_t>(size) + static_cast<std::size_t>(px);
      std::uint8_t g = 255;
      const double dx = (px + 0.5 - half) / radius, dy = (py + 0.5 - half) / radius;
      const double rr = std::sqrt(dx * dx + dy * dy);
      if (std::abs(rr - 1.0) < 0.75 / radius) g = 190;
      if (acc[i] > 0.0) {
        const double t = peak > floor_v ? std::log(acc[i] / floor_v) / span : 1.0;
        g = static_cast<std::uint8_t>(std::lround(200.0 * (1.0 - t)));
      }
      img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = g;
    }
  }
  return img;
}

}  // namespace kleinian
