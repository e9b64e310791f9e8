#pragma once
//
// Orbital and annular counts, truncated Poincare series, exponent estimates
// and the free-product separation certificate.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kleinian/errors.hpp"
#include "kleinian/groups.hpp"
#include "kleinian/hyperbolic.hpp"

namespace kleinian {

/// Compensated (Neumaier) summation.
class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// ln(sum exp(v_i)), accumulated in the given order.
inline double log_sum_exp(const std::vector<double>& logs) {
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(m)) return m;
  NeumaierSum s;
  for (double v : logs) s.add(std::exp(v - m));
  return m + std::log(s.value());
}

namespace detail {
inline constexpr double kRadiusSlack = 1e-9;

inline void require_complete(const OrbitCensus& census, double R) {
  if (R > census.completeness_radius() + kRadiusSlack) {
    throw IncompleteCensus("radius " + std::to_string(R) + " exceeds census completeness radius " +
                           std::to_string(census.completeness_radius()));
  }
}

inline long count_le(const OrbitCensus& census, double R) {
  const auto& e = census.entries();
  const auto it = std::upper_bound(e.begin(), e.end(), R,
                                   [](double r, const CensusEntry& c) { return r < c.distance; });
  return static_cast<long>(it - e.begin());
}

inline long count_lt(const OrbitCensus& census, double R) {
  const auto& e = census.entries();
  const auto it = std::lower_bound(e.begin(), e.end(), R,
                                   [](const CensusEntry& c, double r) { return c.distance < r; });
  return static_cast<long>(it - e.begin());
}
}  // namespace detail

/// #{g : d(x, g y) <= R}.
inline long orbital_count(const OrbitCensus& census, double R) {
  detail::require_complete(census, R);
  return detail::count_le(census, R);
}

/// #{g : R - delta <= d(x, g y) <= R + delta}.
inline long annular_count(const OrbitCensus& census, double R, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("annulus half-width must be positive");
  detail::require_complete(census, R + delta);
  return detail::count_le(census, R + delta) - detail::count_lt(census, R - delta);
}

/// sum over the census of exp(-s d), ascending in d.
inline double poincare_partial(const OrbitCensus& census, double s) {
  if (census.empty()) throw InvalidArgument("empty census");
  NeumaierSum sum;
  for (const CensusEntry& e : census.entries()) sum.add(std::exp(-s * e.distance));
  return sum.value();
}

/// Counts on a radius grid. `annular[k]` is -1 where R + delta exceeds the
/// completeness radius.
struct CountingReport {
  std::vector<double> radii;
  std::vector<long> counts;
  std::vector<long> annular;
  double delta = 1.0;
  double step = 0.5;
};

/// Grid step, 2 step, ... up to r_max (default: the completeness radius).
inline CountingReport counting_report(const OrbitCensus& census, double step = 0.5,
                                      std::optional<double> r_max = std::nullopt,
                                      double delta = 1.0) {
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  const double top = r_max.value_or(census.completeness_radius());
  detail::require_complete(census, top);
  CountingReport rep;
  rep.delta = delta;
  rep.step = step;
  const long n = static_cast<long>(std::floor(top / step + 1e-9));
  for (long k = 1; k <= n; ++k) {
    const double R = static_cast<double>(k) * step;
    rep.radii.push_back(R);
    rep.counts.push_back(detail::count_le(census, R));
    if (R + delta <= census.completeness_radius() + detail::kRadiusSlack) {
      rep.annular.push_back(detail::count_le(census, R + delta) - detail::count_lt(census, R - delta));
    } else {
      rep.annular.push_back(-1);
    }
  }
  return rep;
}

struct ExponentEstimate {
  double point_estimate = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> window_starts;  // start radius of each sliding window
  std::vector<double> slopes;
  double spread = 0.0;
};

/// Ordinary least-squares slope of ys against xs.
inline double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) throw InsufficientData("regression needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw InsufficientData("degenerate regression abscissae");
  return sxy / sxx;
}

inline constexpr double kSlidingWidth = 4.0;
inline constexpr long kMinCountForFit = 50;

namespace detail {

/// Slope of ln v over radii in [lo, hi] (v > 0 entries only).
inline double window_slope(const std::vector<double>& radii, const std::vector<double>& logv,
                           double lo, double hi) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (radii[k] >= lo - 1e-9 && radii[k] <= hi + 1e-9 && std::isfinite(logv[k])) {
      xs.push_back(radii[k]);
      ys.push_back(logv[k]);
    }
  }
  if (xs.size() < 3) throw InsufficientData("fewer than three grid points in the fitting window");
  return ols_slope(xs, ys);
}

inline ExponentEstimate estimate_series(const std::vector<double>& radii,
                                        const std::vector<long>& values, double step,
                                        std::optional<std::pair<double, double>> window) {
  std::vector<double> rs, logv;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (values[k] < 0) continue;
    rs.push_back(radii[k]);
    logv.push_back(values[k] > 0 ? std::log(static_cast<double>(values[k]))
                                 : -std::numeric_limits<double>::infinity());
  }
  if (rs.empty()) throw InsufficientData("empty counting report");
  double lo, hi;
  if (window) {
    lo = window->first;
    hi = window->second;
    if (!(hi > lo)) throw InvalidArgument("fitting window must have hi > lo");
  } else {
    hi = rs.back();
    double r_auto = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rs.size(); ++k) {
      if (std::exp(logv[k]) >= static_cast<double>(kMinCountForFit)) {
        r_auto = rs[k];
        break;
      }
    }
    if (!std::isfinite(r_auto)) {
      throw InsufficientData("counts never reach " + std::to_string(kMinCountForFit));
    }
    lo = std::max(r_auto, hi / 2.0);
  }
  // N(R_min) >= 50 is required at the first grid point in the window.
  for (std::size_t k = 0; k < rs.size(); ++k) {
    if (rs[k] >= lo - 1e-9) {
      if (std::exp(logv[k]) < static_cast<double>(kMinCountForFit) - 0.5) {
        throw InsufficientData("count at window start is below " + std::to_string(kMinCountForFit));
      }
      break;
    }
  }
  ExponentEstimate est;
  est.window_lo = lo;
  est.window_hi = hi;
  est.point_estimate = window_slope(rs, logv, lo, hi);
  if (hi - lo <= kSlidingWidth + 1e-9) {
    est.window_starts.push_back(lo);
    est.slopes.push_back(est.point_estimate);
  } else {
    for (double a = lo; a + kSlidingWidth <= hi + 1e-9; a += step) {
      est.window_starts.push_back(a);
      est.slopes.push_back(window_slope(rs, logv, a, a + kSlidingWidth));
    }
  }
  const auto [mn, mx] = std::minmax_element(est.slopes.begin(), est.slopes.end());
  est.spread = *mx - *mn;
  return est;
}

}  // namespace detail

/// Least-squares slope of ln N(R) against R. Default window: [max(R_50, R_max/2), R_max]
/// where R_50 is the first grid radius with N >= 50.
inline ExponentEstimate estimate_exponent(const CountingReport& rep,
                                          std::optional<std::pair<double, double>> window = std::nullopt) {
  return detail::estimate_series(rep.radii, rep.counts, rep.step, window);
}

/// Same estimator applied to the annular counts n(R, delta).
inline ExponentEstimate estimate_exponent_annular(
    const CountingReport& rep, std::optional<std::pair<double, double>> window = std::nullopt) {
  return detail::estimate_series(rep.radii, rep.annular, rep.step, window);
}

/// Spread of the width-4 sliding-window slopes whose windows end in
/// [R_end - 2, R_end].
inline double slope_spread(const CountingReport& rep, double r_end) {
  std::vector<double> logv;
  for (long c : rep.counts) {
    logv.push_back(c > 0 ? std::log(static_cast<double>(c)) : -std::numeric_limits<double>::infinity());
  }
  std::vector<double> slopes;
  for (double end = r_end - 2.0; end <= r_end + 1e-9; end += rep.step) {
    slopes.push_back(detail::window_slope(rep.radii, logv, end - kSlidingWidth, end));
  }
  const auto [mn, mx] = std::minmax_element(slopes.begin(), slopes.end());
  return *mx - *mn;
}

struct BoundednessAudit {
  double sup_ratio = 0.0;
  double inf_ratio = std::numeric_limits<double>::infinity();
  double spread() const { return sup_ratio / inf_ratio; }
};

/// Extremes of N(R) exp(-delta R) over grid radii in [r_lo, r_hi].
inline BoundednessAudit boundedness_audit(const CountingReport& rep, double delta_hat, double r_lo,
                                          double r_hi = std::numeric_limits<double>::infinity()) {
  BoundednessAudit a;
  bool any = false;
  for (std::size_t k = 0; k < rep.radii.size(); ++k) {
    const double R = rep.radii[k];
    if (R < r_lo - 1e-9 || R > r_hi + 1e-9) continue;
    const double ratio = static_cast<double>(rep.counts[k]) * std::exp(-delta_hat * R);
    a.sup_ratio = std::max(a.sup_ratio, ratio);
    a.inf_ratio = std::min(a.inf_ratio, ratio);
    any = true;
  }
  if (!any) throw InsufficientData("no grid radius in the audit range");
  return a;
}

struct SGrid {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.01;

  std::vector<double> values() const {
    if (!(step > 0.0) || hi < lo) throw InvalidArgument("s-grid needs lo <= hi and step > 0");
    std::vector<double> out;
    const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
};

struct SeparationCertificate {
  double s0 = 0.0;
  Isometry witness;
  double witness_distance = 0.0;
  double subgroup_sum = 0.0;
  double product = 0.0;
};

/// Largest grid s with exp(-s d(o, g o)) * sum_{h != id} exp(-s d(o, h o)) > 1,
/// o being the census basepoint. The free-product structure of <H, g> is the
/// caller's responsibility.
inline SeparationCertificate separation_certificate(const OrbitCensus& subgroup, const Isometry& g,
                                                    const SGrid& grid) {
  const Point& o = subgroup.x();
  const double dg = distance(o, apply(g, o));
  std::vector<double> nontrivial;
  for (const CensusEntry& e : subgroup.entries()) {
    if (!is_identity_entry(e)) nontrivial.push_back(e.distance);
  }
  if (nontrivial.empty()) throw NoCertificate("subgroup census has no nontrivial element");
  std::vector<double> ss = grid.values();
  for (auto it = ss.rbegin(); it != ss.rend(); ++it) {
    const double s = *it;
    NeumaierSum sum;
    for (double d : nontrivial) sum.add(std::exp(-s * d));
    const double product = std::exp(-s * dg) * sum.value();
    if (product > 1.0) return {s, g, dg, sum.value(), product};
  }
  throw NoCertificate("no grid exponent satisfies the free-product inequality");
}

}  // namespace kleinian
