#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kleinian/catalog.hpp"
#include "kleinian/counting.hpp"
#include "kleinian/patterson.hpp"
#include "test_support.hpp"

using namespace kleinian;
using testsupport::Gen;

namespace {

EnumerationLimits radius(double R) {
  EnumerationLimits l;
  l.max_radius = R;
  return l;
}

EnumerationLimits words(long L) {
  EnumerationLimits l;
  l.max_word_length = L;
  return l;
}

// Shared Schottky census; enumeration dominates the runtime of this file.
const OrbitCensus& schottky22() {
  static const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(22.0));
  return c;
}

double schottky_exponent() {
  static const double d = estimate_exponent(counting_report(schottky22())).point_estimate;
  return d;
}

/// Normalized angular measure: n atoms at equal angles seen from i, all beyond `dist`.
AtomicMeasure uniform_measure(int n, double dist) {
  std::vector<Atom> atoms;
  for (int k = 0; k < n; ++k) {
    Atom a;
    a.location = Point::i();
    a.distance = dist;
    a.view_angle = kTwoPi * (k + 0.5) / n;
    a.boundary_angle = angle_of(boundary_at_angle(Point::i(), a.view_angle));
    a.log_weight = -std::log(static_cast<double>(n));
    atoms.push_back(a);
  }
  return AtomicMeasure(Point::i(), Point::i(), 1.0, ModifierH::unit(), 0.0, atoms.size(), std::move(atoms));
}

}  // namespace

// --- construction ---------------------------------------------------------------------

TEST(OrbitalMeasure, IdentityOnlyCensusIsADiracMass) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(1.0));
  ASSERT_EQ(c.size(), 1u);
  const AtomicMeasure mu = orbital_measure(c, 0.7);
  ASSERT_EQ(mu.atoms().size(), 1u);
  EXPECT_DOUBLE_EQ(mu.atoms()[0].weight(), 1.0);
  EXPECT_DOUBLE_EQ(mu.total_mass(), 1.0);
}

TEST(OrbitalMeasure, TotalMassAtTheCensusBasepointIsOne) {
  for (double s : {0.45, 0.6, 1.0}) EXPECT_NEAR(orbital_measure(schottky22(), s).total_mass(), 1.0, 1e-12);
  const AtomicMeasure h = orbital_measure(schottky22(), 0.6, Point::i(), ModifierH::polynomial(1.5));
  EXPECT_NEAR(h.total_mass(), 1.0, 1e-12);
  EXPECT_THROW(ModifierH::polynomial(-1.0), InvalidArgument);
}

TEST(OrbitalMeasure, ParabolicNearestAtomsAreTheGenerators) {
  const OrbitCensus c = enumerate(catalog::parabolic(), Point::i(), Point::i(), words(200));
  const AtomicMeasure mu = orbital_measure(c, 0.6);
  std::vector<const Atom*> order;
  for (const Atom& a : mu.atoms()) order.push_back(&a);
  std::stable_sort(order.begin(), order.end(), [](const Atom* l, const Atom* r) { return l->weight() > r->weight(); });
  EXPECT_EQ(order[0]->word_length, 0);
  EXPECT_EQ(order[1]->word_length, 1);
  EXPECT_EQ(order[2]->word_length, 1);
  EXPECT_NEAR(std::abs(order[1]->location.re()), 1.0, 1e-15);
  EXPECT_NEAR(order[1]->weight(), std::exp(-0.6 * std::acosh(1.5)) / std::exp(mu.log_normalizer()), 1e-15);
}

TEST(OrbitalMeasure, DegenerateNormalizer) {
  // y far down the cusp: every orbit point is at distance > 300 from i.
  const OrbitCensus c = enumerate(catalog::parabolic(), Point::i(), Point(0.0, 1e-150), words(10));
  EXPECT_THROW(orbital_measure(c, 5.0), DegenerateNormalizer);
  EXPECT_NO_THROW(orbital_measure(c, 1.0));
}

// --- conformality -------------------------------------------------------------------

TEST(Conformal, SameBasepointHasNoDeviation) {
  const AtomicMeasure mu = orbital_measure(schottky22(), 0.6, Point(0.3, 1.1));
  EXPECT_EQ(conformal_ratio_audit(mu, mu, Point::i()).max_deviation, 0.0);
}

TEST(ConformalProperty, SchottkyAtomRatiosAreExact) {
  Gen gen(61);
  const double s = schottky_exponent() + 0.05;
  for (int k = 0; k < 5; ++k) {
    const Point xa(gen.uniform(-1.0, 1.0), gen.uniform(0.5, 2.0));
    const Point xb(gen.uniform(-1.0, 1.0), gen.uniform(0.5, 2.0));
    const ConformalAudit a =
        conformal_ratio_audit(orbital_measure(schottky22(), s, xa), orbital_measure(schottky22(), s, xb), Point::i());
    EXPECT_LE(a.max_deviation, 1e-12);
    EXPECT_GE(a.far_min_distance, 15.0);
    EXPECT_LT(a.max_far_gap, 1e-3);
  }
}

TEST(Conformal, MismatchedConstruction) {
  const OrbitCensus small = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(8.0));
  const AtomicMeasure a = orbital_measure(small, 0.6);
  EXPECT_THROW(conformal_ratio_audit(a, orbital_measure(small, 0.7), Point::i()), MismatchedConstruction);
  EXPECT_THROW(conformal_ratio_audit(a, orbital_measure(schottky22(), 0.6), Point::i()), MismatchedConstruction);
  EXPECT_THROW(conformal_ratio_audit(a, orbital_measure(small, 0.6, Point::i(), ModifierH::polynomial(1.0)), Point::i()),
               MismatchedConstruction);
}

// --- equivariance ---------------------------------------------------------------------

TEST(Equivariance, IdentityIsExact) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), words(6));
  const EquivarianceAudit a = equivariance_audit(c, Isometry(), Word(), 0.6, Point(0.2, 1.3));
  EXPECT_EQ(a.max_discrepancy, 0.0);
  EXPECT_EQ(a.leakage, 0.0);
  EXPECT_EQ(a.unmatched, 0u);
}

TEST(Equivariance, CyclicLeakageIsTheBoundaryAtoms) {
  const long K = 10;
  const double s = 0.4;
  const Point x(0.2, 1.3);
  const Isometry a = catalog::cyclic_hyperbolic().generators[0];
  const OrbitCensus c = enumerate(catalog::cyclic_hyperbolic(), Point::i(), Point::i(), words(K));
  const EquivarianceAudit audit = equivariance_audit(c, a, Word::from_letters({0}), s, x);
  // a^-K has no partner on the pulled side, a^K is missed on the target side.
  const AtomicMeasure mu = orbital_measure(c, s, x);
  const AtomicMeasure target = orbital_measure(c, s, apply(a.inverse(), x));
  double expected = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const CensusEntry& e = c.entries()[k];
    if (e.word_length != K) continue;
    const bool negative = e.word.letters()[0] == 1;
    expected += negative ? mu.atoms()[k].weight() : target.atoms()[k].weight();
  }
  EXPECT_EQ(audit.unmatched, 2u);
  EXPECT_NEAR(audit.leakage, expected, 1e-15);
  EXPECT_LE(audit.max_discrepancy, 1e-15);
}

TEST(Equivariance, SchottkyLeakageDecreasesWithWordLength) {
  const double s = schottky_exponent() + 0.1;
  std::vector<double> leak;
  for (long L : {6L, 8L, 10L}) {
    const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), words(L));
    const EquivarianceAudit e = equivariance_audit(c, catalog::schottky_b(), Word::from_letters({2}), s, Point(0.2, 1.3));
    EXPECT_LE(e.max_discrepancy, 1e-12);
    leak.push_back(e.leakage);
  }
  EXPECT_LT(leak[1], leak[0]);
  EXPECT_LT(leak[2], leak[1]);
}

TEST(Equivariance, LatticeMatchesByMatrix) {
  const OrbitCensus c = enumerate(catalog::lattice(), Point::i(), Point::i(), radius(7.0));
  const Isometry T = catalog::parabolic_generator();
  const EquivarianceAudit e = equivariance_audit(c, T, Word(), 1.2, Point(0.1, 1.4));
  EXPECT_LE(e.max_discrepancy, 1e-12);
  EXPECT_GT(e.matched, c.size() / 2);
}

// --- shadows --------------------------------------------------------------------------

TEST(ShadowMass, FullEmptyAndAdditive) {
  const AtomicMeasure mu = orbital_measure(schottky22(), 0.6);
  EXPECT_NEAR(shadow_mass(mu, BoundaryInterval::full(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(shadow_mass(mu, BoundaryInterval::from_angles(1.0, 1e-12), 0.0), 0.0);
  const ShadowIndex index(mu, 5.0);
  Gen gen(62);
  for (int k = 0; k < 200; ++k) {
    const double a = gen.uniform(0.0, kTwoPi), w1 = gen.uniform(0.0, 2.0), w2 = gen.uniform(0.0, 2.0);
    const double whole = shadow_mass(mu, BoundaryInterval::from_angles(a, w1 + w2), 5.0);
    const double parts = shadow_mass(mu, BoundaryInterval::from_angles(a, w1), 5.0) +
                         shadow_mass(mu, BoundaryInterval::from_angles(a + w1, w2), 5.0);
    // Atoms exactly on the shared endpoint would be counted twice; none are for random cuts.
    EXPECT_NEAR(whole, parts, 1e-12);
    EXPECT_NEAR(index.mass(BoundaryInterval::from_angles(a, w1 + w2)), whole, 1e-12);
  }
}

TEST(ShadowAudit, UniformMeasureHasBoundedRatios) {
  // Mass of O(g o, r) is its angular width / 2 pi, which is comparable to e^{-d}:
  // the ratio runs from 1.38 at d = 2 ln 4 down to 2 sinh(r) / pi = 1.36.
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), words(3));
  const ShadowAudit a = shadow_lemma_audit(c, uniform_measure(200000, 50.0), 1.0, 1.5, 1, 3, 10.0);
  EXPECT_FALSE(a.radius_too_small);
  EXPECT_EQ(a.records.size(), 4u + 12u + 36u);
  EXPECT_GT(a.min_ratio, 1.3);
  EXPECT_LT(a.max_ratio, 1.45);
}

TEST(ShadowAudit, SchottkyAtItsExponent) {
  const double dh = schottky_exponent();
  const AtomicMeasure mu = orbital_measure(schottky22(), dh + 0.05);
  const ShadowAudit a = shadow_lemma_audit(schottky22(), mu, dh, 1.5, 3, 7, 11.0);
  EXPECT_FALSE(a.radius_too_small);
  EXPECT_GT(a.min_ratio, 0.0);
  EXPECT_LE(a.spread(), 1e3);
}

TEST(ShadowAudit, TinyRadiusIsFlagged) {
  // Seen from i, the half-turn about i puts g h i on the ray through g i for
  // h = rho g^-1 rho, so no shadow is ever empty there. Move off the center.
  const Point o(0.3, 1.2);
  const OrbitCensus c = enumerate(catalog::schottky(), o, o, radius(22.0));
  const AtomicMeasure mu = orbital_measure(c, schottky_exponent() + 0.05);
  EXPECT_FALSE(shadow_lemma_audit(c, mu, schottky_exponent(), 1.5, 3, 7, 11.0).radius_too_small);
  const ShadowAudit tiny = shadow_lemma_audit(c, mu, schottky_exponent(), 1e-2, 3, 7, 11.0);
  EXPECT_TRUE(tiny.radius_too_small);
  EXPECT_EQ(tiny.min_ratio, 0.0);
}

TEST(ShadowCover, CountingBoundHolds) {
  const AtomicMeasure mu = orbital_measure(schottky22(), schottky_exponent() + 0.05);
  const auto bands = shadow_cover_bound(schottky22(), mu, 1.5, 4.0, 9.0, 1.0, 11.0);
  ASSERT_FALSE(bands.empty());
  for (const CoverBand& b : bands) {
    EXPECT_TRUE(b.holds) << b.r_lo;
    EXPECT_GE(b.multiplicity, 1);
    EXPECT_LE(b.mass_sum, b.multiplicity * b.total_mass + 1e-12);
  }
}

TEST(ArcMultiplicity, Examples) {
  EXPECT_EQ(arc_multiplicity({}), 0);
  EXPECT_EQ(arc_multiplicity({BoundaryInterval::from_angles(0.0, 1.0), BoundaryInterval::from_angles(2.0, 1.0)}), 1);
  EXPECT_EQ(arc_multiplicity({BoundaryInterval::from_angles(0.0, 1.0), BoundaryInterval::from_angles(0.5, 1.0),
                              BoundaryInterval::from_angles(6.0, 1.0)}),
            3);
  EXPECT_EQ(arc_multiplicity({BoundaryInterval::full(), BoundaryInterval::from_angles(0.5, 0.1)}), 2);
}

// --- limit set ------------------------------------------------------------------------

TEST(LimitPoints, DepthOneSitsNearTheAttractingFixedPoints) {
  const GroupSpec spec = catalog::schottky();
  const auto pts = radial_limit_points(spec, 1);
  ASSERT_EQ(pts.size(), 4u);
  const PingPongCertificate cert = verify_ping_pong(spec.generators);
  const auto letters = letter_isometries(spec);
  for (const LimitPoint& p : pts) {
    const int l = p.word.letters()[0];
    const BoundaryInterval arc = cert.intervals[static_cast<std::size_t>(l)];
    EXPECT_TRUE(arc.contains(p.point));
    EXPECT_TRUE(arc.contains(fixed_points(letters[static_cast<std::size_t>(l)]).attracting));
  }
  // a = diag(4, 1/4) attracts to infinity, its inverse to 0.
  EXPECT_TRUE(pts[0].point.is_infinite() || std::abs(pts[0].point.value()) > 1.0);
  ASSERT_FALSE(pts[1].point.is_infinite());
  EXPECT_LT(std::abs(pts[1].point.value()), 1.0);
  EXPECT_THROW(radial_limit_points(catalog::lattice(), 1), InvalidArgument);
  EXPECT_THROW(radial_limit_points(spec, 0), InvalidArgument);
}

TEST(LimitPointsProperty, CylindersAreNested) {
  const GroupSpec spec = catalog::schottky();
  const PingPongCertificate cert = verify_ping_pong(spec.generators);
  const auto letters = letter_isometries(spec);
  for (int depth = 2; depth <= 5; ++depth) {
    for (const LimitPoint& p : radial_limit_points(spec, depth)) {
      std::vector<int> w = p.word.letters();
      const BoundaryInterval arc = word_interval(cert, letters, w);
      EXPECT_TRUE(arc.contains(p.point));
      const BoundaryInterval parent = word_interval(cert, letters, std::vector<int>(w.begin(), w.end() - 1));
      EXPECT_TRUE(parent.contains(arc.lo()));
      EXPECT_TRUE(parent.contains(arc.hi()));
      EXPECT_LT(arc.width(), parent.width());
    }
  }
}

TEST(LimitPoints, DepthTenCylindersAreSmall) {
  const GroupSpec spec = catalog::schottky();
  const auto pts = radial_limit_points(spec, 10);
  EXPECT_EQ(pts.size(), 4u * 19683u);
  const PingPongCertificate cert = verify_ping_pong(spec.generators);
  const auto letters = letter_isometries(spec);
  double widest = 0.0;
  for (const LimitPoint& p : pts) widest = std::max(widest, word_interval(cert, letters, p.word.letters()).width());
  EXPECT_LT(widest, 1e-3 * kTwoPi);
  std::vector<double> angles;
  for (const LimitPoint& p : pts) angles.push_back(p.angle);
  std::sort(angles.begin(), angles.end());
  EXPECT_EQ(std::adjacent_find(angles.begin(), angles.end()), angles.end());
}

// --- histograms, gauge, rendering -----------------------------------------------------

TEST(Histogram, MassAndStability) {
  const double s = schottky_exponent() + 0.05;
  const AtomicMeasure mu = orbital_measure(schottky22(), s);
  const auto h = boundary_histogram(mu, 64, 11.0);
  ASSERT_EQ(h.size(), 64u);
  double total = 0.0;
  for (const HistogramBin& b : h) total += b.mass;
  EXPECT_NEAR(total, shadow_mass(mu, BoundaryInterval::full(), 11.0), 1e-12);
  EXPECT_EQ(histogram_instability({h, h}), 0.0);
  // Growing the truncation barely moves the normalized picture.
  const OrbitCensus small = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(18.0));
  const auto hs = boundary_histogram(orbital_measure(small, s), 64, 9.0);
  const auto hb = boundary_histogram(mu, 64, 9.0);
  EXPECT_LT(histogram_instability({hs, hb}), 0.05);
  EXPECT_THROW(boundary_histogram(mu, 0, 1.0), InvalidArgument);
}

TEST(Gauge, PolynomialModifiersDoNotChangeTheExponent) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(26.0));
  const double base = modified_series_exponent(c, ModifierH::unit(), 13.0, 26.0);
  EXPECT_DOUBLE_EQ(base, estimate_exponent(counting_report(c), std::make_pair(13.0, 26.0)).point_estimate);
  for (double beta : {1.0, 2.0}) {
    EXPECT_NEAR(modified_series_exponent(c, ModifierH::polynomial(beta), 13.0, 26.0), base, 1e-2) << beta;
  }
  EXPECT_THROW(modified_series_exponent(c, ModifierH::unit(), 13.0, 30.0), IncompleteCensus);
}

TEST(Gauge, RatioRateVanishesOnPlantedCounts) {
  // Planted ball counts e^{delta R}: the ratio for (1 + t)^beta has no exponential part.
  const double delta = 0.5;
  std::vector<double> d{0.0};
  for (long k = 2; k <= 400000; ++k) d.push_back(std::log(static_cast<double>(k)) / delta);
  const OrbitCensus c = OrbitCensus::synthetic(d, std::log(4e5) / delta);
  for (double beta : {1.0, 2.0}) {
    EXPECT_NEAR(gauge_ratio_rate(c, ModifierH::polynomial(beta), delta, 12.0, 25.0), 0.0, 5e-3) << beta;
  }
  EXPECT_THROW(gauge_ratio_rate(c, ModifierH::unit(), 0.0, 12.0, 25.0), InvalidArgument);
}

TEST(Render, DeterministicAndWhiteBackground) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(14.0));
  const AtomicMeasure mu = orbital_measure(c, 0.6);
  const Raster a = render_density(mu, 128), b = render_density(mu, 128);
  EXPECT_EQ(a.width, 128);
  EXPECT_EQ(a.rgb.size(), 3u * 128 * 128);
  EXPECT_EQ(a.rgb, b.rgb);
  // Corner pixel lies outside the disk.
  EXPECT_EQ(a.rgb[0], 255);
  EXPECT_NE(std::count(a.rgb.begin(), a.rgb.end(), 255), static_cast<long>(a.rgb.size()));
  EXPECT_THROW(render_density(mu, 4), InvalidArgument);
}
