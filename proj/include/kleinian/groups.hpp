#pragma once
//
// Group constructions, ping-pong certificates and orbit enumeration.
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "kleinian/errors.hpp"
#include "kleinian/hyperbolic.hpp"

namespace kleinian {

// --- words ------------------------------------------------------------------

/// Letter codes: 2 * generator for the generator, 2 * generator + 1 for its inverse.
inline constexpr int letter_inverse(int letter) { return letter ^ 1; }
inline constexpr int letter_generator(int letter) { return letter >> 1; }
inline constexpr bool letter_is_inverse(int letter) { return (letter & 1) != 0; }
inline constexpr int make_letter(int generator, bool inverse) { return 2 * generator + (inverse ? 1 : 0); }

/// A maximal run g^e of one generator.
struct Syllable {
  int generator = 0;
  long exponent = 0;
  friend auto operator<=>(const Syllable&, const Syllable&) = default;
};

/// Reduced word stored as syllables; consecutive syllables use different generators.
class Word {
 public:
  Word() = default;

  /// Builds from syllables, merging equal neighbours and dropping zero exponents.
  explicit Word(const std::vector<Syllable>& syllables) {
    for (const Syllable& s : syllables) append(s.generator, s.exponent);
  }

  static Word from_letters(const std::vector<int>& letters) {
    Word w;
    for (int l : letters) w.append(letter_generator(l), letter_is_inverse(l) ? -1 : 1);
    return w;
  }

  void append(int generator, long exponent) {
    if (exponent == 0) return;
    if (!syllables_.empty() && syllables_.back().generator == generator) {
      syllables_.back().exponent += exponent;
      if (syllables_.back().exponent == 0) syllables_.pop_back();
    } else {
      syllables_.push_back({generator, exponent});
    }
  }

  const std::vector<Syllable>& syllables() const { return syllables_; }
  bool empty() const { return syllables_.empty(); }

  long length() const {
    long n = 0;
    for (const Syllable& s : syllables_) n += s.exponent < 0 ? -s.exponent : s.exponent;
    return n;
  }

  std::vector<int> letters() const {
    std::vector<int> out;
    for (const Syllable& s : syllables_) {
      const long n = s.exponent < 0 ? -s.exponent : s.exponent;
      for (long k = 0; k < n; ++k) out.push_back(make_letter(s.generator, s.exponent < 0));
    }
    return out;
  }

  Word inverse() const {
    Word w;
    for (auto it = syllables_.rbegin(); it != syllables_.rend(); ++it) {
      w.append(it->generator, -it->exponent);
    }
    return w;
  }

  friend Word operator*(const Word& l, const Word& r) {
    Word w = l;
    for (const Syllable& s : r.syllables_) w.append(s.generator, s.exponent);
    return w;
  }

  /// Generators printed as a, b, c, ...; inverses in upper case; powers as a^5.
  std::string to_string() const {
    if (syllables_.empty()) return "e";
    std::string out;
    for (const Syllable& s : syllables_) {
      const char base = static_cast<char>((s.exponent < 0 ? 'A' : 'a') + (s.generator % 26));
      const long n = s.exponent < 0 ? -s.exponent : s.exponent;
      if (s.generator >= 26 || n > 3) {
        out += base;
        if (s.generator >= 26) out += std::to_string(s.generator);
        if (n > 1) out += "^" + std::to_string(n);
      } else {
        out.append(static_cast<std::size_t>(n), base);
      }
    }
    return out;
  }

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Syllable> syllables_;
};

// --- group specifications ---------------------------------------------------

enum class GroupKind {
  schottky,
  cyclic_hyperbolic,
  cyclic_parabolic,
  modular_lattice,
  conjugated,
  nested_subgroup
};

inline const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::schottky: return "schottky";
    case GroupKind::cyclic_hyperbolic: return "cyclic_hyperbolic";
    case GroupKind::cyclic_parabolic: return "cyclic_parabolic";
    case GroupKind::modular_lattice: return "modular_lattice";
    case GroupKind::conjugated: return "conjugated";
    case GroupKind::nested_subgroup: return "nested_subgroup";
  }
  return "?";
}

inline GroupKind group_kind_from_string(const std::string& s) {
  for (GroupKind k : {GroupKind::schottky, GroupKind::cyclic_hyperbolic, GroupKind::cyclic_parabolic,
                      GroupKind::modular_lattice, GroupKind::conjugated,
                      GroupKind::nested_subgroup}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidArgument("unknown group kind '" + s + "'");
}

/// For nested_subgroup, `generators` holds {alpha, beta} and the group is
/// generated by alpha^-n beta alpha^n for 0 <= n <= depth. For conjugated,
/// `inner` is wrapped and every element g becomes conjugator^-1 g conjugator.
struct GroupSpec {
  GroupKind kind = GroupKind::modular_lattice;
  std::vector<Isometry> generators;
  Isometry conjugator;
  int depth = 0;
  std::shared_ptr<const GroupSpec> inner;

  static GroupSpec schottky(std::vector<Isometry> gens) {
    GroupSpec s;
    s.kind = GroupKind::schottky;
    s.generators = std::move(gens);
    return s;
  }
  static GroupSpec cyclic(const Isometry& g) {
    GroupSpec s;
    s.kind = classify(g) == Classification::parabolic ? GroupKind::cyclic_parabolic
                                                      : GroupKind::cyclic_hyperbolic;
    s.generators = {g};
    return s;
  }
  static GroupSpec modular_lattice() { return {}; }
  static GroupSpec nested_subgroup(const Isometry& alpha, const Isometry& beta, int depth) {
    GroupSpec s;
    s.kind = GroupKind::nested_subgroup;
    s.generators = {alpha, beta};
    s.depth = depth;
    return s;
  }

  /// Number of free generators (letters come in pairs).
  int rank() const {
    switch (kind) {
      case GroupKind::schottky: return static_cast<int>(generators.size());
      case GroupKind::cyclic_hyperbolic:
      case GroupKind::cyclic_parabolic: return 1;
      case GroupKind::nested_subgroup: return depth + 1;
      case GroupKind::modular_lattice: return 2;
      case GroupKind::conjugated: return inner ? inner->rank() : 0;
    }
    return 0;
  }
};

/// Wraps `spec` so that enumeration yields c^-1 g c for each element g.
inline GroupSpec conjugate(const GroupSpec& spec, const Isometry& c) {
  GroupSpec s;
  s.kind = GroupKind::conjugated;
  s.conjugator = c;
  s.inner = std::make_shared<const GroupSpec>(spec);
  return s;
}

inline const Isometry& modular_S() {
  static const Isometry s(0.0, -1.0, 1.0, 0.0);
  return s;
}
inline const Isometry& modular_T() {
  static const Isometry t(1.0, 1.0, 0.0, 1.0);
  return t;
}

/// Isometry of each letter code of a free construction.
inline std::vector<Isometry> letter_isometries(const GroupSpec& spec) {
  std::vector<Isometry> out;
  auto push = [&](const Isometry& g) {
    out.push_back(g);
    out.push_back(g.inverse());
  };
  switch (spec.kind) {
    case GroupKind::schottky:
    case GroupKind::cyclic_hyperbolic:
    case GroupKind::cyclic_parabolic:
      for (const Isometry& g : spec.generators) push(g);
      break;
    case GroupKind::nested_subgroup: {
      const Isometry& alpha = spec.generators.at(0);
      const Isometry& beta = spec.generators.at(1);
      for (int n = 0; n <= spec.depth; ++n) push(alpha.pow(-n) * beta * alpha.pow(n));
      break;
    }
    case GroupKind::modular_lattice:
      push(modular_S());
      push(modular_T());
      break;
    case GroupKind::conjugated: {
      const Isometry c = spec.conjugator;
      for (const Isometry& g : letter_isometries(*spec.inner)) {
        out.push_back(c.inverse() * g * c);
      }
      break;
    }
  }
  return out;
}

/// Element represented by a word in the spec's generators.
inline Isometry evaluate(const GroupSpec& spec, const Word& w) {
  const std::vector<Isometry> letters = letter_isometries(spec);
  Isometry g;
  for (const Syllable& s : w.syllables()) {
    const int idx = 2 * s.generator;
    if (idx + 1 >= static_cast<int>(letters.size())) {
      throw InvalidArgument("word uses generator " + std::to_string(s.generator) +
                            " outside the spec");
    }
    g = g * letters[static_cast<std::size_t>(idx)].pow(s.exponent);
  }
  return g;
}

// --- ping-pong --------------------------------------------------------------

/// One arc per letter code. `margin` is the least gap between distinct arcs;
/// `nesting_slack` the least clearance of l(complement of I(l^-1)) inside I(l).
struct PingPongCertificate {
  std::vector<BoundaryInterval> intervals;
  double margin = 0.0;
  double nesting_slack = 0.0;

  /// l(complement of I(l^-1)), the arc holding every orbit point whose word starts with l.
  std::vector<BoundaryInterval> inner_arcs(const std::vector<Isometry>& letters) const {
    std::vector<BoundaryInterval> out;
    for (std::size_t l = 0; l < intervals.size(); ++l) {
      out.push_back(intervals[l ^ 1U].complement().image(letters[l]));
    }
    return out;
  }
};

namespace detail {

inline std::vector<Isometry> with_inverses(const std::vector<Isometry>& gens) {
  std::vector<Isometry> out;
  for (const Isometry& g : gens) {
    out.push_back(g);
    out.push_back(g.inverse());
  }
  return out;
}

inline void require_hyperbolic(const std::vector<Isometry>& gens) {
  if (gens.empty()) throw InvalidArgument("at least one generator is required");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (classify(gens[i]) != Classification::hyperbolic) {
      throw NonHyperbolicGenerator(static_cast<int>(i));
    }
  }
}

struct PingPongScore {
  double margin;
  double slack;
  int margin_pair[2];
  int slack_letter;
};

inline PingPongScore score_intervals(const std::vector<Isometry>& letters,
                                     const std::vector<BoundaryInterval>& arcs) {
  PingPongScore s{kTwoPi, kTwoPi, {0, 0}, 0};
  const int n = static_cast<int>(arcs.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double g = arcs[static_cast<std::size_t>(i)].gap(arcs[static_cast<std::size_t>(j)]);
      if (g < s.margin) {
        s.margin = g;
        s.margin_pair[0] = i;
        s.margin_pair[1] = j;
      }
    }
  }
  for (int l = 0; l < n; ++l) {
    const BoundaryInterval& own = arcs[static_cast<std::size_t>(l)];
    const BoundaryInterval& other = arcs[static_cast<std::size_t>(letter_inverse(l))];
    if (other.is_full()) {
      s.slack = -kTwoPi;
      s.slack_letter = l;
      continue;
    }
    const BoundaryInterval image = other.complement().image(letters[static_cast<std::size_t>(l)]);
    const double slack = own.inner_slack(image);
    if (slack < s.slack) {
      s.slack = slack;
      s.slack_letter = l;
    }
  }
  return s;
}

}  // namespace detail

/// Checks that the arcs are pairwise disjoint and that each letter maps the
/// complement of its inverse's arc strictly inside its own arc.
inline PingPongCertificate verify_ping_pong(const std::vector<Isometry>& generators,
                                            const std::vector<BoundaryInterval>& intervals) {
  detail::require_hyperbolic(generators);
  if (intervals.size() != 2 * generators.size()) {
    throw InvalidArgument("expected one candidate arc per letter");
  }
  const std::vector<Isometry> letters = detail::with_inverses(generators);
  const detail::PingPongScore s = detail::score_intervals(letters, intervals);
  if (!(s.margin > 0.0)) {
    throw MarginViolation(s.margin_pair[0], s.margin_pair[1],
                          "ping-pong arcs of letters " + std::to_string(s.margin_pair[0]) + " and " +
                              std::to_string(s.margin_pair[1]) + " are not disjoint");
  }
  if (!(s.slack > 0.0)) {
    throw MarginViolation(s.slack_letter, letter_inverse(s.slack_letter),
                          "letter " + std::to_string(s.slack_letter) +
                              " does not map the complement of its inverse's arc inside its own arc");
  }
  return {intervals, s.margin, s.slack};
}

/// Arcs of a common angular half-width centered at each letter's attracting
/// fixed point; the half-width maximizes min(margin, nesting slack).
inline std::vector<BoundaryInterval> propose_ping_pong_intervals(const std::vector<Isometry>& generators) {
  detail::require_hyperbolic(generators);
  const std::vector<Isometry> letters = detail::with_inverses(generators);
  std::vector<double> centers;
  for (const Isometry& l : letters) centers.push_back(angle_of(fixed_points(l).attracting));
  double closest = kTwoPi;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      const double d = wrap_angle(centers[i] - centers[j]);
      closest = std::min({closest, d, kTwoPi - d});
    }
  }
  if (centers.size() == 2) closest = std::min(closest, std::numbers::pi);
  auto arcs_for = [&](double psi) {
    std::vector<BoundaryInterval> arcs;
    for (double c : centers) arcs.push_back(BoundaryInterval::from_angles(c - psi, 2.0 * psi));
    return arcs;
  };
  if (!(closest > 0.0)) {
    // Coincident fixed points: return overlapping arcs and let verification report it.
    return arcs_for(0.25);
  }
  const int steps = 2000;
  double best_psi = closest / 4.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 1; k < steps; ++k) {
    const double psi = 0.5 * closest * k / steps;
    const detail::PingPongScore s = detail::score_intervals(letters, arcs_for(psi));
    const double score = std::min(s.margin, s.slack);
    if (score > best) {
      best = score;
      best_psi = psi;
    }
  }
  return arcs_for(best_psi);
}

inline PingPongCertificate verify_ping_pong(const std::vector<Isometry>& generators) {
  return verify_ping_pong(generators, propose_ping_pong_intervals(generators));
}

/// Lower bound on the defect of broken geodesics derived from a certificate.
/// Seen from `viewpoint`, orbit points whose reduced words start with
/// different letters lie in arcs at least `theta` apart, so for a reduced
/// product PQ: d(v, PQ v) >= d(v, P v) + d(v, Q v) - defect, and d(v, Q v) >= escape.
struct CertifiedDefect {
  Point viewpoint;
  double theta = 0.0;
  double defect = std::numeric_limits<double>::infinity();
  double escape = 0.0;
  bool valid = false;
};

inline CertifiedDefect certified_defect(const PingPongCertificate& cert,
                                        const std::vector<Isometry>& letters, const Point& v) {
  CertifiedDefect out;
  out.viewpoint = v;
  for (const BoundaryInterval& arc : cert.intervals) {
    if (arc.seen_from(v).width >= std::numbers::pi) return out;
  }
  std::vector<AngularArc> inner;
  for (const BoundaryInterval& a : cert.inner_arcs(letters)) inner.push_back(a.seen_from(v));
  double theta = std::numbers::pi;
  double escape = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inner.size(); ++i) {
    for (std::size_t j = i + 1; j < inner.size(); ++j) theta = std::min(theta, inner[i].gap(inner[j]));
    const double psi = inner[i].width / 2.0;
    escape = std::min(escape, 2.0 * std::atanh(1.0 / std::cos(psi) - std::tan(psi)));
  }
  if (!(theta > 0.0)) return out;
  out.theta = theta;
  out.defect = -2.0 * std::log(std::sin(theta / 2.0));
  out.escape = escape;
  out.valid = true;
  return out;
}

// --- censuses ---------------------------------------------------------------

struct EnumerationLimits {
  /// Negative means no word-length bound (the radius must then be finite).
  long max_word_length = -1;
  double max_radius = std::numeric_limits<double>::infinity();
  std::size_t max_entries = 10'000'000;
  unsigned threads = 1;
};

struct CensusEntry {
  double distance = 0.0;
  long word_length = 0;
  Isometry element;
  Word word;  // empty for the lattice
};

inline bool is_identity_entry(const CensusEntry& e) {
  return e.word_length == 0 && e.element.is_identity(1e-12);
}

inline bool census_order(const CensusEntry& l, const CensusEntry& r) {
  if (l.distance != r.distance) return l.distance < r.distance;
  if (l.word_length != r.word_length) return l.word_length < r.word_length;
  if (l.word != r.word) return l.word < r.word;
  return std::make_tuple(l.element.a(), l.element.b(), l.element.c(), l.element.d()) <
         std::make_tuple(r.element.a(), r.element.b(), r.element.c(), r.element.d());
}

/// Orbit distances {d(x, g y)} sorted ascending. Counts are exact up to
/// `completeness_radius`; `certified` tells whether that radius is proven.
class OrbitCensus {
 public:
  OrbitCensus() = default;

  OrbitCensus(Point x, Point y, std::vector<CensusEntry> entries, double completeness_radius,
              bool has_words = true, bool certified = true, std::size_t pruned = 0)
      : x_(x), y_(y), entries_(std::move(entries)), completeness_(completeness_radius),
        has_words_(has_words), certified_(certified), pruned_(pruned) {
    std::sort(entries_.begin(), entries_.end(), census_order);
  }

  /// Census of bare distances, e.g. planted test data. A zero distance marks
  /// the identity; other entries get word length 1.
  static OrbitCensus synthetic(const std::vector<double>& distances, double completeness_radius) {
    std::vector<CensusEntry> e;
    e.reserve(distances.size());
    for (double d : distances) e.push_back({d, d == 0.0 ? 0 : 1, Isometry(), Word()});
    return OrbitCensus(Point::i(), Point::i(), std::move(e), completeness_radius, false, true);
  }

  const Point& x() const { return x_; }
  const Point& y() const { return y_; }
  const std::vector<CensusEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double completeness_radius() const { return completeness_; }
  bool has_words() const { return has_words_; }
  bool certified() const { return certified_; }
  std::size_t pruned() const { return pruned_; }

  long max_word_length() const {
    long m = 0;
    for (const CensusEntry& e : entries_) m = std::max(m, e.word_length);
    return m;
  }

  std::vector<double> distances() const {
    std::vector<double> d;
    d.reserve(entries_.size());
    for (const CensusEntry& e : entries_) d.push_back(e.distance);
    return d;
  }

 private:
  Point x_;
  Point y_;
  std::vector<CensusEntry> entries_;
  double completeness_ = 0.0;
  bool has_words_ = false;
  bool certified_ = false;
  std::size_t pruned_ = 0;
};

namespace detail {

inline void validate_limits(const EnumerationLimits& lim) {
  if (std::isnan(lim.max_radius) || lim.max_radius < 0.0) {
    throw InvalidArgument("max_radius must be nonnegative");
  }
  if (lim.max_word_length < 0 && !std::isfinite(lim.max_radius)) {
    throw InvalidArgument("enumeration needs a finite radius or word-length bound");
  }
  if (lim.max_entries == 0) throw InvalidArgument("max_entries must be positive");
}

inline long word_bound(const EnumerationLimits& lim) {
  return lim.max_word_length < 0 ? std::numeric_limits<long>::max() : lim.max_word_length;
}

inline OrbitCensus enumerate_cyclic(const GroupSpec& spec, const Point& x, const Point& y,
                                    const EnumerationLimits& lim) {
  if (spec.generators.size() != 1) throw InvalidArgument("cyclic groups take exactly one generator");
  const Isometry& g = spec.generators[0];
  const Classification c = classify(g);
  const bool want_parabolic = spec.kind == GroupKind::cyclic_parabolic;
  if ((want_parabolic && c != Classification::parabolic) ||
      (!want_parabolic && c != Classification::hyperbolic)) {
    throw InvalidArgument(std::string("generator is ") + to_string(c) + ", expected " +
                          (want_parabolic ? "parabolic" : "hyperbolic"));
  }
  const double R = lim.max_radius;
  const long nmax = word_bound(lim);
  const double dxy = distance(x, y);
  std::vector<CensusEntry> entries;
  if (dxy <= R) entries.push_back({dxy, 0, Isometry(), Word()});
  double completeness = R;
  const Isometry ginv = g.inverse();
  Isometry pos, neg;
  for (long n = 1;; ++n) {
    pos = pos * g;
    neg = neg * ginv;
    // d(y, g^n y) grows with |n| for parabolic and hyperbolic g.
    const double lower = distance(y, apply(pos, y)) - dxy;
    if (n > nmax) {
      completeness = std::min(R, std::max(0.0, lower));
      break;
    }
    if (lower > R) break;
    for (int sgn : {1, -1}) {
      const Isometry& e = sgn > 0 ? pos : neg;
      const double d = distance(x, apply(e, y));
      if (d <= R) entries.push_back({d, n, e, Word({{0, sgn * n}})});
    }
    if (entries.size() > lim.max_entries) {
      throw BudgetExceeded("census exceeds " + std::to_string(lim.max_entries) + " entries");
    }
  }
  return OrbitCensus(x, y, std::move(entries), completeness, true, true);
}

/// Depth-first traversal of the reduced-word tree of a free construction.
/// `prefix_letter` maps the node element to P (the part ending in a letter of
/// the certified ambient free group) used by the subtree lower bound.
struct FreeWalker {
  const std::vector<Isometry>* letters = nullptr;
  const std::vector<Isometry>* prefix_correction = nullptr;  // per letter, or null
  Point x, y;
  double R = 0.0;
  long max_len = 0;
  std::size_t max_entries = 0;
  bool prune = false;
  CertifiedDefect cert;
  double offset = 0.0;  // d(x, v) + d(y, v)

  std::vector<CensusEntry> entries;
  std::vector<int> word;
  double frontier = std::numeric_limits<double>::infinity();
  std::size_t pruned = 0;

  double subtree_bound(const Isometry& g, int last) const {
    if (!cert.valid) return -std::numeric_limits<double>::infinity();
    const Isometry p = prefix_correction ? g * (*prefix_correction)[static_cast<std::size_t>(last)] : g;
    const Point& v = cert.viewpoint;
    return distance(v, apply(p, v)) + cert.escape - cert.defect - offset;
  }

  void visit(const Isometry& g, int last) {
    word.push_back(last);
    const long len = static_cast<long>(word.size());
    const double d = distance(x, apply(g, y));
    if (d <= R) {
      entries.push_back({d, len, g, Word::from_letters(word)});
      if (entries.size() > max_entries) {
        throw BudgetExceeded("census exceeds " + std::to_string(max_entries) + " entries");
      }
    }
    if (len >= max_len) {
      frontier = std::min(frontier, subtree_bound(g, last));
    } else if (prune && subtree_bound(g, last) > R) {
      ++pruned;
    } else {
      const int n = static_cast<int>(letters->size());
      for (int l = 0; l < n; ++l) {
        if (l == letter_inverse(last)) continue;
        visit(g * (*letters)[static_cast<std::size_t>(l)], l);
      }
    }
    word.pop_back();
  }
};

inline OrbitCensus enumerate_free(const GroupSpec& spec, const Point& x, const Point& y,
                                  const EnumerationLimits& lim) {
  // Ambient free group carrying the ping-pong certificate.
  std::vector<Isometry> ambient;
  if (spec.kind == GroupKind::schottky) {
    ambient = spec.generators;
  } else {
    if (spec.generators.size() != 2) throw InvalidArgument("nested_subgroup needs alpha and beta");
    if (spec.depth < 0) throw InvalidArgument("nested_subgroup depth must be >= 0");
    ambient = spec.generators;
  }
  const PingPongCertificate cert = verify_ping_pong(ambient);
  const std::vector<Isometry> ambient_letters = with_inverses(ambient);
  const std::vector<Isometry> letters = letter_isometries(spec);

  // For the nested construction, an element h_{n1}^{e1} ... h_{nk}^{ek} equals
  // P alpha^{nk} with P a reduced ambient word ending in beta; every extension
  // extends P.
  std::vector<Isometry> correction;
  if (spec.kind == GroupKind::nested_subgroup) {
    for (int n = 0; n <= spec.depth; ++n) {
      const Isometry back = spec.generators[0].pow(-n);
      correction.push_back(back);
      correction.push_back(back);
    }
  }

  CertifiedDefect cd;
  for (const Point& v : {y, x, Point::i()}) {
    cd = certified_defect(cert, ambient_letters, v);
    if (cd.valid) break;
  }
  const double R = lim.max_radius;
  const long max_len = word_bound(lim);
  if (!cd.valid && max_len == std::numeric_limits<long>::max()) {
    throw InvalidArgument("no certified pruning bound; a finite max_word_length is required");
  }

  const int nletters = static_cast<int>(letters.size());
  const unsigned workers = std::max(1U, std::min<unsigned>(lim.threads, static_cast<unsigned>(nletters)));
  std::vector<FreeWalker> walkers(static_cast<std::size_t>(nletters));
  for (int l = 0; l < nletters; ++l) {
    FreeWalker& w = walkers[static_cast<std::size_t>(l)];
    w.letters = &letters;
    w.prefix_correction = correction.empty() ? nullptr : &correction;
    w.x = x;
    w.y = y;
    w.R = R;
    w.max_len = max_len;
    w.max_entries = lim.max_entries;
    w.prune = cd.valid && std::isfinite(R);
    w.cert = cd;
    w.offset = distance(x, cd.viewpoint) + distance(y, cd.viewpoint);
  }
  auto run_subtrees = [&](unsigned worker, std::exception_ptr& err) {
    try {
      for (int l = static_cast<int>(worker); l < nletters; l += static_cast<int>(workers)) {
        if (max_len >= 1) walkers[static_cast<std::size_t>(l)].visit(letters[static_cast<std::size_t>(l)], l);
      }
    } catch (...) {
      err = std::current_exception();
    }
  };
  std::vector<std::exception_ptr> errors(workers);
  if (workers == 1) {
    run_subtrees(0, errors[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run_subtrees, t, std::ref(errors[t]));
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<CensusEntry> entries;
  const double dxy = distance(x, y);
  if (dxy <= R) entries.push_back({dxy, 0, Isometry(), Word()});
  double frontier = std::numeric_limits<double>::infinity();
  std::size_t pruned = 0;
  for (FreeWalker& w : walkers) {
    entries.insert(entries.end(), std::make_move_iterator(w.entries.begin()),
                   std::make_move_iterator(w.entries.end()));
    frontier = std::min(frontier, w.frontier);
    pruned += w.pruned;
  }
  if (max_len == 0) frontier = cd.valid ? -dxy : -std::numeric_limits<double>::infinity();
  if (entries.size() > lim.max_entries) {
    throw BudgetExceeded("census exceeds " + std::to_string(lim.max_entries) + " entries");
  }
  const double completeness = std::max(0.0, std::min(R, frontier));
  return OrbitCensus(x, y, std::move(entries), completeness, true, cd.valid, pruned);
}

// Exact PSL(2,Z) arithmetic.
struct IntMatrix {
  std::int64_t a, b, c, d;

  void canonicalize() {
    const std::int64_t lead = a != 0 ? a : (b != 0 ? b : c);
    if (lead < 0) {
      a = -a;
      b = -b;
      c = -c;
      d = -d;
    }
  }
  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

struct IntMatrixHash {
  std::size_t operator()(const IntMatrix& m) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : {m.a, m.b, m.c, m.d}) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::int64_t checked_mul_add(std::int64_t p, std::int64_t q, std::int64_t r, std::int64_t s) {
  std::int64_t x, y, z;
  if (__builtin_mul_overflow(p, q, &x) || __builtin_mul_overflow(r, s, &y) ||
      __builtin_add_overflow(x, y, &z)) {
    throw OverflowError("modular lattice entry exceeds 63 bits");
  }
  return z;
}

inline IntMatrix times(const IntMatrix& l, const IntMatrix& r) {
  IntMatrix m{checked_mul_add(l.a, r.a, l.b, r.c), checked_mul_add(l.a, r.b, l.b, r.d),
              checked_mul_add(l.c, r.a, l.d, r.c), checked_mul_add(l.c, r.b, l.d, r.d)};
  m.canonicalize();
  return m;
}

inline Isometry to_isometry(const IntMatrix& m) {
  return Isometry(static_cast<double>(m.a), static_cast<double>(m.b), static_cast<double>(m.c),
                  static_cast<double>(m.d));
}

/// Breadth-first search over right multiplication by S, T, T^-1. A node is
/// expanded when d(i, g i) <= R + d(x, i) + d(y, i); column reduction of any
/// such g descends to the identity through nodes of smaller d(i, . i), so an
/// exhausted search is complete.
inline OrbitCensus enumerate_lattice(const Point& x, const Point& y, const EnumerationLimits& lim) {
  if (!std::isfinite(lim.max_radius)) throw InvalidArgument("modular lattice needs a finite radius");
  const double R = lim.max_radius;
  const long max_len = word_bound(lim);
  const Point o = Point::i();
  const double reach = R + distance(x, o) + distance(y, o);
  const IntMatrix gens[3] = {{0, -1, 1, 0}, {1, 1, 0, 1}, {1, -1, 0, 1}};
  const std::size_t node_cap = 8 * lim.max_entries;

  std::unordered_set<IntMatrix, IntMatrixHash> seen;
  std::vector<IntMatrix> layer{{1, 0, 0, 1}};
  seen.insert(layer[0]);
  std::vector<CensusEntry> entries;
  double frontier = std::numeric_limits<double>::infinity();
  for (long depth = 0; !layer.empty(); ++depth) {
    std::vector<IntMatrix> next;
    for (const IntMatrix& m : layer) {
      const Isometry g = to_isometry(m);
      const double d = distance(x, apply(g, y));
      if (d <= R) {
        entries.push_back({d, depth, g, Word()});
        if (entries.size() > lim.max_entries) {
          throw BudgetExceeded("census exceeds " + std::to_string(lim.max_entries) + " entries");
        }
      }
      const double from_o = distance(o, apply(g, o));
      if (from_o > reach) continue;
      if (depth >= max_len) {
        frontier = std::min(frontier, from_o - (reach - R));
        continue;
      }
      for (const IntMatrix& s : gens) {
        const IntMatrix n = times(m, s);
        if (seen.insert(n).second) next.push_back(n);
      }
      if (seen.size() > node_cap) {
        throw BudgetExceeded("lattice search exceeds " + std::to_string(node_cap) + " nodes");
      }
    }
    layer = std::move(next);
  }
  const double completeness = std::max(0.0, std::min(R, frontier));
  return OrbitCensus(x, y, std::move(entries), completeness, false, frontier >= R);
}

}  // namespace detail

/// All distinct elements g with d(x, g y) <= max_radius reachable within the
/// word-length bound, sorted by distance.
inline OrbitCensus enumerate(const GroupSpec& spec, const Point& x, const Point& y,
                             const EnumerationLimits& limits) {
  detail::validate_limits(limits);
  switch (spec.kind) {
    case GroupKind::cyclic_hyperbolic:
    case GroupKind::cyclic_parabolic: return detail::enumerate_cyclic(spec, x, y, limits);
    case GroupKind::schottky:
    case GroupKind::nested_subgroup: return detail::enumerate_free(spec, x, y, limits);
    case GroupKind::modular_lattice: return detail::enumerate_lattice(x, y, limits);
    case GroupKind::conjugated: {
      if (!spec.inner) throw InvalidArgument("conjugated spec without inner group");
      const Isometry& c = spec.conjugator;
      const Isometry cinv = c.inverse();
      // d(x, c^-1 g c y) = d(c x, g c y).
      const OrbitCensus inner = enumerate(*spec.inner, apply(c, x), apply(c, y), limits);
      std::vector<CensusEntry> entries = inner.entries();
      for (CensusEntry& e : entries) e.element = cinv * e.element * c;
      return OrbitCensus(x, y, std::move(entries), inner.completeness_radius(), inner.has_words(),
                         inner.certified(), inner.pruned());
    }
  }
  throw InvalidArgument("unsupported group kind");
}

// --- defect audit -----------------------------------------------------------

/// Largest d(o, g o) + d(o, h o) - d(o, gh o) over admissible letter pairs h != g^-1.
inline double defect_bound(const GroupSpec& spec, const Point& o = Point::i()) {
  const std::vector<Isometry> letters = letter_isometries(spec);
  double worst = 0.0;
  const int n = static_cast<int>(letters.size());
  for (int g = 0; g < n; ++g) {
    for (int h = 0; h < n; ++h) {
      if (h == letter_inverse(g)) continue;
      const Isometry& G = letters[static_cast<std::size_t>(g)];
      const Isometry& H = letters[static_cast<std::size_t>(h)];
      const double defect = distance(o, apply(G, o)) + distance(o, apply(H, o)) -
                            distance(o, apply(G * H, o));
      worst = std::max(worst, defect);
    }
  }
  return worst;
}

struct DefectChainAudit {
  double worst_slack = std::numeric_limits<double>::infinity();
  Word worst_word;
  std::size_t checked = 0;
  bool passed() const { return worst_slack >= -1e-9; }
};

/// Checks d(o, w o) >= sum_i d(o, w_i o) - (|w| - 1) D over census words of
/// length <= max_length. The census must have x = y = o.
inline DefectChainAudit audit_defect_chain(const OrbitCensus& census, const GroupSpec& spec,
                                           double D, long max_length = 8) {
  if (!census.has_words()) throw InvalidArgument("defect audit needs word metadata");
  const std::vector<Isometry> letters = letter_isometries(spec);
  const Point& o = census.x();
  std::vector<double> letter_len;
  for (const Isometry& l : letters) letter_len.push_back(distance(o, apply(l, o)));
  DefectChainAudit audit;
  for (const CensusEntry& e : census.entries()) {
    if (e.word_length == 0 || e.word_length > max_length) continue;
    double sum = 0.0;
    for (int l : e.word.letters()) sum += letter_len[static_cast<std::size_t>(l)];
    const double slack = e.distance - (sum - static_cast<double>(e.word_length - 1) * D);
    ++audit.checked;
    if (slack < audit.worst_slack) {
      audit.worst_slack = slack;
      audit.worst_word = e.word;
    }
  }
  return audit;
}

}  // namespace kleinian
