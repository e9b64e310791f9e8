#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kleinian/catalog.hpp"
#include "kleinian/counting.hpp"
#include "test_support.hpp"

using namespace kleinian;
using testsupport::Gen;

namespace {

EnumerationLimits radius(double R) {
  EnumerationLimits l;
  l.max_radius = R;
  return l;
}

long scan_count(const OrbitCensus& c, double lo, bool lo_closed, double hi) {
  long n = 0;
  for (double d : c.distances()) {
    if ((lo_closed ? d >= lo : d > lo) && d <= hi) ++n;
  }
  return n;
}

std::vector<double> planted_distances(double delta, long K) {
  std::vector<double> d{0.0};
  for (long k = 2; k <= K; ++k) d.push_back(std::log(static_cast<double>(k)) / delta);
  return d;
}

}  // namespace

// --- summation helpers ------------------------------------------------------------

TEST(Summation, NeumaierAndLogSumExp) {
  NeumaierSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_DOUBLE_EQ(s.value(), 1.0);
  EXPECT_NEAR(log_sum_exp({1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_sum_exp({-1000.0, std::log(3.0) - 1000.0}), std::log(4.0) - 1000.0, 1e-12);
}

// --- counts -----------------------------------------------------------------------

TEST(OrbitalCount, Examples) {
  const OrbitCensus cyc = enumerate(catalog::cyclic_hyperbolic(), Point::i(), Point::i(), radius(10.0));
  EXPECT_EQ(orbital_count(cyc, 5.5), 11);
  const OrbitCensus par = enumerate(catalog::parabolic(), Point::i(), Point::i(), radius(10.0));
  EXPECT_EQ(orbital_count(par, 2.0 * std::log(10.0) + 0.02), 21);
  // Closed form: 1 + 2 max{n : acosh(1 + n^2 / 2) <= R}.
  for (double R : {1.0, 3.3, 6.0, 9.9}) {
    long n = 0;
    while (std::acosh(1.0 + (n + 1.0) * (n + 1.0) / 2.0) <= R) ++n;
    EXPECT_EQ(orbital_count(par, R), 1 + 2 * n) << R;
  }
}

TEST(OrbitalCount, BeyondCompletenessRadiusIsAnError) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(8.0));
  EXPECT_THROW(orbital_count(c, 9.0), IncompleteCensus);
  EXPECT_THROW(annular_count(c, 7.5, 1.0), IncompleteCensus);
  EXPECT_NO_THROW(orbital_count(c, 8.0));
}

TEST(OrbitalCountProperty, NondecreasingInRadius) {
  const OrbitCensus c = enumerate(catalog::lattice(), Point::i(), Point::i(), radius(9.0));
  long prev = 0;
  for (double R = 0.0; R <= 9.0; R += 0.05) {
    const long n = orbital_count(c, R);
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(AnnularCountProperty, MatchesClosedAnnulusScan) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point(0.1, 1.2), Point::i(), radius(14.0));
  Gen gen(41);
  for (int k = 0; k < 100; ++k) {
    const double delta = gen.uniform(0.05, 2.0);
    const double R = gen.uniform(0.0, 14.0 - delta);
    EXPECT_EQ(annular_count(c, R, delta), scan_count(c, R - delta, true, R + delta));
    // n(R, D) = N(R + D) - N((R - D)^-).
    EXPECT_EQ(annular_count(c, R, delta), orbital_count(c, R + delta) - scan_count(c, -1.0, true, R - delta) +
                                              scan_count(c, R - delta, true, R - delta));
  }
}

// --- Poincare partial sums -----------------------------------------------------------

TEST(PoincarePartial, IdentityOnlyCensusIsOne) {
  const OrbitCensus c = OrbitCensus::synthetic({0.0}, 5.0);
  for (double s : {0.0, 0.3, 2.0}) EXPECT_DOUBLE_EQ(poincare_partial(c, s), 1.0);
}

TEST(PoincarePartial, CyclicGeometricSeries) {
  const long K = 12;
  const OrbitCensus c = enumerate(catalog::cyclic_hyperbolic(), Point::i(), Point::i(), radius(K + 0.5));
  for (double s : {0.1, 0.5, 1.3}) {
    const double closed = 1.0 + 2.0 * (std::exp(-s) - std::exp(-s * (K + 1))) / (1.0 - std::exp(-s));
    EXPECT_NEAR(poincare_partial(c, s), closed, 1e-12 * closed);
  }
}

TEST(PoincarePartial, ParabolicDivergesLogarithmicallyAtOneHalf) {
  // Terms behave like 1/n, so partial sums grow like 2 ln K.
  std::vector<double> xs, ys;
  for (long K : {100L, 1000L, 10000L, 100000L}) {
    EnumerationLimits lim;
    lim.max_word_length = K;
    const OrbitCensus c = enumerate(catalog::parabolic(), Point::i(), Point::i(), lim);
    xs.push_back(std::log(static_cast<double>(K)));
    ys.push_back(poincare_partial(c, 0.5));
  }
  const double slope = ols_slope(xs, ys);
  EXPECT_GT(slope, 0.5);
  EXPECT_LT(slope, 4.0);
}

TEST(PoincarePartialProperty, NonincreasingInS) {
  Gen gen(42);
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point(0.4, 0.6), radius(14.0));
  for (int k = 0; k < 200; ++k) {
    const double s = gen.uniform(0.0, 2.0), t = s + gen.uniform(0.0, 1.0);
    EXPECT_GE(poincare_partial(c, s), poincare_partial(c, t));
  }
}

// --- estimator ---------------------------------------------------------------------

TEST(EstimatorProperty, RecoversPlantedExponent) {
  for (double delta : {0.3, 0.5, 0.9}) {
    // N(R) = floor(e^{delta R}) up to R_max.
    const double Rmax = std::log(2e5) / delta;
    const OrbitCensus c = OrbitCensus::synthetic(planted_distances(delta, 200000), Rmax);
    const ExponentEstimate e = estimate_exponent(counting_report(c));
    EXPECT_NEAR(e.point_estimate, delta, 0.02 * delta) << delta;
  }
}

TEST(Estimator, TooFewPointsIsInsufficientData) {
  const OrbitCensus c = enumerate(catalog::cyclic_hyperbolic(), Point::i(), Point::i(), radius(10.0));
  EXPECT_THROW(estimate_exponent(counting_report(c)), InsufficientData);
}

TEST(Estimator, ExamplesFromTheBasicGroups) {
  auto est = [](const GroupSpec& s, double R) {
    return estimate_exponent(counting_report(enumerate(s, Point::i(), Point::i(), radius(R)))).point_estimate;
  };
  EXPECT_LE(est(catalog::cyclic_hyperbolic(), 30.0), 0.05);
  EXPECT_NEAR(est(catalog::parabolic(), 18.0), 0.5, 0.05);
  EXPECT_NEAR(est(catalog::lattice(), 12.0), 1.0, 0.1);
}

TEST(Estimator, ExplicitWindowAndSlopes) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(20.0));
  const CountingReport rep = counting_report(c);
  const ExponentEstimate e = estimate_exponent(rep, std::make_pair(12.0, 20.0));
  EXPECT_DOUBLE_EQ(e.window_lo, 12.0);
  EXPECT_DOUBLE_EQ(e.window_hi, 20.0);
  EXPECT_FALSE(e.slopes.empty());
  EXPECT_EQ(e.slopes.size(), e.window_starts.size());
  EXPECT_GE(e.spread, 0.0);
  const auto [mn, mx] = std::minmax_element(e.slopes.begin(), e.slopes.end());
  EXPECT_NEAR(e.spread, *mx - *mn, 1e-15);
}

TEST(EstimatorProperty, BasepointIndependence) {
  Gen gen(43);
  struct Case {
    GroupSpec spec;
    double R;
  };
  for (const Case& cs : {Case{catalog::lattice(), 12.0}, Case{catalog::schottky(), 26.0}}) {
    std::vector<ExponentEstimate> ests;
    for (int k = 0; k < 2; ++k) {
      const Point x(gen.uniform(-0.4, 0.4), gen.uniform(0.8, 1.5));
      const Point y(gen.uniform(-0.4, 0.4), gen.uniform(0.8, 1.5));
      ests.push_back(estimate_exponent(counting_report(enumerate(cs.spec, x, y, radius(cs.R)))));
    }
    EXPECT_LE(std::abs(ests[0].point_estimate - ests[1].point_estimate), ests[0].spread + ests[1].spread);
  }
}

TEST(EstimatorProperty, AnnularAndBallCountsGiveTheSameExponent) {
  for (const auto& [spec, R] : {std::pair{catalog::lattice(), 12.0}, std::pair{catalog::schottky(), 26.0}}) {
    const CountingReport rep = counting_report(enumerate(spec, Point::i(), Point::i(), radius(R)));
    const ExponentEstimate ball = estimate_exponent(rep);
    const ExponentEstimate ann = estimate_exponent_annular(rep);
    EXPECT_LE(std::abs(ball.point_estimate - ann.point_estimate), ball.spread + ann.spread);
  }
}

TEST(SlopeSpread, ShrinksWithRadius) {
  const CountingReport rep = counting_report(enumerate(catalog::lattice(), Point::i(), Point::i(), radius(12.0)));
  EXPECT_LT(slope_spread(rep, 12.0), 0.5 * slope_spread(rep, 6.0));
}

// --- boundedness ---------------------------------------------------------------------

TEST(Boundedness, ExactExponentialHasRatiosNearOne) {
  const double delta = 0.8;
  const OrbitCensus c = OrbitCensus::synthetic(planted_distances(delta, 100000), std::log(1e5) / delta);
  const BoundednessAudit a = boundedness_audit(counting_report(c), delta, 6.0, 14.0);
  EXPECT_GE(a.inf_ratio, 0.95);
  EXPECT_LE(a.sup_ratio, 1.0 + 1e-12);
}

TEST(Boundedness, LatticeAndParabolic) {
  const CountingReport lat = counting_report(enumerate(catalog::lattice(), Point::i(), Point::i(), radius(12.0)));
  EXPECT_LE(boundedness_audit(lat, estimate_exponent(lat).point_estimate, 6.0, 12.0).spread(), 20.0);
  // N(R) ~ 2 e^{R/2} for the parabolic group: the audit stays bounded too.
  const CountingReport par = counting_report(enumerate(catalog::parabolic(), Point::i(), Point::i(), radius(18.0)));
  EXPECT_LE(boundedness_audit(par, 0.5, 6.0, 18.0).spread(), 2.0);
  EXPECT_THROW(boundedness_audit(par, 0.5, 30.0, 40.0), InsufficientData);
}

// --- separation -------------------------------------------------------------------

TEST(Separation, SchottkyCertificate) {
  const OrbitCensus h = enumerate(GroupSpec::cyclic(catalog::schottky_a()), Point::i(), Point::i(), radius(28.0));
  const SeparationCertificate sc = separation_certificate(h, catalog::schottky_b(), SGrid{0.0, 1.0, 0.01});
  EXPECT_GT(sc.s0, 0.0);
  EXPECT_GT(sc.product, 1.0);
  const ExponentEstimate full =
      estimate_exponent(counting_report(enumerate(catalog::schottky(), Point::i(), Point::i(), radius(26.0))));
  EXPECT_LE(sc.s0, full.point_estimate + full.spread);
}

TEST(Separation, IdentityOnlyCensusHasNoCertificate) {
  const OrbitCensus h = enumerate(GroupSpec::cyclic(catalog::schottky_a()), Point::i(), Point::i(), radius(1.0));
  ASSERT_EQ(h.size(), 1u);
  EXPECT_THROW(separation_certificate(h, catalog::schottky_b(), SGrid{}), NoCertificate);
}

TEST(SeparationProperty, NeverExceedsTheUntruncatedThreshold) {
  // H = <a> with o on its axis: sum over H* is 2 q / (1 - q), q = e^{-s l}. The
  // certificate from any truncation stays below the exact threshold and
  // approaches it as the truncation grows.
  const double ell = translation_length(catalog::schottky_a());
  const double dg = distance(Point::i(), apply(catalog::schottky_b(), Point::i()));
  auto product = [&](double s) {
    const double q = std::exp(-s * ell);
    return std::exp(-s * dg) * 2.0 * q / (1.0 - q);
  };
  double lo = 1e-6, hi = 5.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = (lo + hi) / 2.0;
    (product(mid) > 1.0 ? lo : hi) = mid;
  }
  const double threshold = lo;
  const SGrid grid{0.0, 1.0, 0.001};
  double prev = 0.0;
  for (double R : {6.0, 12.0, 24.0, 48.0}) {
    const OrbitCensus h = enumerate(GroupSpec::cyclic(catalog::schottky_a()), Point::i(), Point::i(), radius(R));
    const SeparationCertificate sc = separation_certificate(h, catalog::schottky_b(), grid);
    EXPECT_LE(sc.s0, threshold);
    EXPECT_GE(sc.s0, prev);
    prev = sc.s0;
  }
  EXPECT_NEAR(prev, threshold, 2e-3);
}

TEST(SGrid, Values) {
  const auto v = SGrid{0.0, 1.0, 0.25}.values();
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(v.back(), 1.0);
  EXPECT_THROW((SGrid{1.0, 0.0, 0.1}.values()), InvalidArgument);
}
