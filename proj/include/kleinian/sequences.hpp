#pragma once
//
// Growth rates of nonnegative sequences and the associated Dirichlet-type
// series. Everything is kept in log space: a sequence is stored as ln u_n
// with -inf for zero terms.
//

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kleinian/errors.hpp"

namespace kleinian {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// ln(e^a + e^b).
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Finite nonnegative sequence u_0..u_N held as logarithms.
class SequenceProbe {
 public:
  static SequenceProbe from_values(const std::vector<double>& u) {
    std::vector<double> logs;
    logs.reserve(u.size());
    for (double v : u) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("sequence terms must be finite and >= 0");
      logs.push_back(v > 0.0 ? std::log(v) : kNegInf);
    }
    return SequenceProbe(std::move(logs));
  }

  static SequenceProbe from_logs(std::vector<double> logs) {
    for (double v : logs) {
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw InvalidArgument("log terms must be finite or -inf");
      }
    }
    return SequenceProbe(std::move(logs));
  }

  std::size_t size() const { return logs_.size(); }
  /// Largest index N.
  long horizon() const { return static_cast<long>(logs_.size()) - 1; }
  double log(long n) const { return logs_.at(static_cast<std::size_t>(n)); }
  const std::vector<double>& logs() const { return logs_; }

  /// ln U_n with U_n = u_0 + ... + u_n.
  std::vector<double> log_partial_sums() const {
    std::vector<double> out(logs_.size());
    double acc = kNegInf;
    for (std::size_t n = 0; n < logs_.size(); ++n) {
      acc = log_add(acc, logs_[n]);
      out[n] = acc;
    }
    return out;
  }

  /// First n + 1 terms.
  SequenceProbe truncated(long n) const {
    return SequenceProbe(std::vector<double>(logs_.begin(), logs_.begin() + n + 1));
  }

  /// Terms u_n * exp(shift * n).
  SequenceProbe tilted(double shift) const {
    std::vector<double> out = logs_;
    for (std::size_t n = 0; n < out.size(); ++n) {
      if (out[n] != kNegInf) out[n] += shift * static_cast<double>(n);
    }
    return SequenceProbe(std::move(out));
  }

  SequenceProbe scaled(double log_factor) const {
    std::vector<double> out = logs_;
    for (double& v : out) {
      if (v != kNegInf) v += log_factor;
    }
    return SequenceProbe(std::move(out));
  }

 private:
  explicit SequenceProbe(std::vector<double> logs) : logs_(std::move(logs)) {
    if (logs_.size() < 2) throw InvalidArgument("sequence needs at least two terms");
    if (std::all_of(logs_.begin(), logs_.end(), [](double v) { return v == kNegInf; })) {
      throw AllZero("sequence has no positive term");
    }
  }
  std::vector<double> logs_;
};

inline constexpr double kTailFraction = 0.2;

namespace detail {
inline long tail_start(long N) {
  return std::max(1L, static_cast<long>(std::ceil((1.0 - kTailFraction) * static_cast<double>(N))));
}

/// max and min of logs[n] / n over the last 20% of indices.
inline std::pair<double, double> tail_rates(const std::vector<double>& logs) {
  const long N = static_cast<long>(logs.size()) - 1;
  double hi = kNegInf;
  double lo = std::numeric_limits<double>::infinity();
  for (long n = tail_start(N); n <= N; ++n) {
    const double r = logs[static_cast<std::size_t>(n)] / static_cast<double>(n);
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  return {hi, lo};
}
}  // namespace detail

/// Tail proxies for limsup/liminf of (1/n) ln u_n and limsup of (1/n) ln U_n.
struct ExponentProxies {
  double from_u = 0.0;
  double from_partial_sums = 0.0;
  double liminf_u = 0.0;
};

inline ExponentProxies critical_exponent(const SequenceProbe& u) {
  const auto [hi, lo] = detail::tail_rates(u.logs());
  const auto [uhi, ulo] = detail::tail_rates(u.log_partial_sums());
  (void)ulo;
  return {hi, uhi, lo};
}

/// |estimate at horizon N - estimate at N/2| for the u-based proxy.
inline double horizon_doubling_drift(const SequenceProbe& u) {
  const long half = u.horizon() / 2;
  if (half < 2) throw InsufficientData("horizon too short for a doubling comparison");
  return std::abs(critical_exponent(u).from_u - critical_exponent(u.truncated(half)).from_u);
}

enum class SeriesGrowth { bounded, growing, inconclusive };

inline const char* to_string(SeriesGrowth g) {
  switch (g) {
    case SeriesGrowth::bounded: return "bounded";
    case SeriesGrowth::growing: return "growing";
    case SeriesGrowth::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Growth of ln S_n between n = N/2 and N for S_n = sum_{k<=n} exp(logs_k - s k).
inline SeriesGrowth classify_partial_sums(const std::vector<double>& logs, double s) {
  const long N = static_cast<long>(logs.size()) - 1;
  double acc = kNegInf;
  double at_half = kNegInf;
  for (long n = 0; n <= N; ++n) {
    const double v = logs[static_cast<std::size_t>(n)];
    if (v != kNegInf) acc = log_add(acc, v - s * static_cast<double>(n));
    if (n == N / 2) at_half = acc;
  }
  const double growth = acc == kNegInf ? 0.0 : acc - at_half;
  if (growth > 1.0) return SeriesGrowth::growing;
  if (growth < 0.01) return SeriesGrowth::bounded;
  return SeriesGrowth::inconclusive;
}

inline constexpr double kNeutralBand = 0.02;

struct SeriesComparisonRow {
  double s = 0.0;
  SeriesGrowth series_u = SeriesGrowth::inconclusive;
  SeriesGrowth series_U = SeriesGrowth::inconclusive;
  bool in_neutral_band = false;
  bool agree = false;
};

struct SeriesComparisonReport {
  double exponent_u = 0.0;
  double exponent_U = 0.0;
  double agreement = 0.0;
  std::vector<SeriesComparisonRow> rows;
  /// Outside the neutral band both series are classified the same way.
  bool classifications_agree() const {
    return std::all_of(rows.begin(), rows.end(),
                       [](const SeriesComparisonRow& r) { return r.in_neutral_band || r.agree; });
  }
};

/// Compares sum u_n e^{-sn} with sum U_n e^{-sn} on the grid, and the exponents of u and U.
inline SeriesComparisonReport series_comparison_check(const SequenceProbe& u, const std::vector<double>& s_grid) {
  SeriesComparisonReport rep;
  const ExponentProxies e = critical_exponent(u);
  rep.exponent_u = e.from_u;
  rep.exponent_U = e.from_partial_sums;
  rep.agreement = std::abs(e.from_u - e.from_partial_sums);
  const std::vector<double> U = u.log_partial_sums();
  for (double s : s_grid) {
    SeriesComparisonRow row;
    row.s = s;
    row.series_u = classify_partial_sums(u.logs(), s);
    row.series_U = classify_partial_sums(U, s);
    row.in_neutral_band = std::abs(s - e.from_u) <= kNeutralBand / 2.0;
    row.agree = row.series_u == row.series_U && row.series_u != SeriesGrowth::inconclusive;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Minimal ln C with u_{n+m} <= C u_n u_m for n, m >= 1, n + m <= N.
inline double submultiplicative_log_constant(const SequenceProbe& u) {
  const long N = u.horizon();
  double worst = kNegInf;
  for (long n = 1; n <= N; ++n) {
    for (long m = n; n + m <= N; ++m) {
      const double lhs = u.log(n + m);
      if (lhs == kNegInf) continue;
      worst = std::max(worst, lhs - u.log(n) - u.log(m));
    }
  }
  return worst;
}

struct FeketeReport {
  double log_inf_root = 0.0;   // min_{1<=k<=N} (1/k) ln u_k
  long argmin = 0;
  double log_last_root = 0.0;  // (1/N) ln u_N
  double gap = 0.0;            // log_last_root - log_inf_root
  bool converged = false;
  double inf_root() const { return std::exp(log_inf_root); }
  double last_root() const { return std::exp(log_last_root); }
};

/// Validates u_{n+m} <= u_n u_m exhaustively, then compares (u_N)^{1/N} with inf_k (u_k)^{1/k}.
inline FeketeReport fekete_check(const SequenceProbe& u, double eps = 1e-2) {
  const long N = u.horizon();
  for (long n = 1; n <= N; ++n) {
    if (u.log(n) == kNegInf) throw InvalidArgument("submultiplicative check needs u_n > 0 for n >= 1");
  }
  for (long n = 1; n <= N; ++n) {
    for (long m = n; n + m <= N; ++m) {
      const double rhs = u.log(n) + u.log(m);
      if (u.log(n + m) > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) throw NotSubmultiplicative(n, m);
    }
  }
  FeketeReport rep;
  rep.log_inf_root = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= N; ++k) {
    const double r = u.log(k) / static_cast<double>(k);
    if (r < rep.log_inf_root) {
      rep.log_inf_root = r;
      rep.argmin = k;
    }
  }
  rep.log_last_root = u.log(N) / static_cast<double>(N);
  rep.gap = rep.log_last_root - rep.log_inf_root;
  rep.converged = rep.gap <= eps;
  return rep;
}

namespace detail {
/// ln sum_{i=lo}^{hi} u_i from prefix log sums.
inline double log_window_sum(const std::vector<double>& logs, long lo, long hi) {
  double acc = kNegInf;
  for (long i = std::max(0L, lo); i <= hi; ++i) acc = log_add(acc, logs[static_cast<std::size_t>(i)]);
  return acc;
}
}  // namespace detail

/// Minimal ln C with u_k u_l <= C sum_{i=k+l-kappa}^{k+l+kappa} u_i over
/// kappa <= k <= l, k + l + kappa <= N.
inline double window_log_constant(const SequenceProbe& u, long kappa) {
  if (kappa < 1) throw InvalidArgument("kappa must be >= 1");
  const long N = u.horizon();
  double worst = kNegInf;
  for (long k = kappa; k <= N; ++k) {
    for (long l = k; k + l + kappa <= N; ++l) {
      const double lhs = u.log(k) + u.log(l);
      if (lhs == kNegInf) continue;
      worst = std::max(worst, lhs - detail::log_window_sum(u.logs(), k + l - kappa, k + l + kappa));
    }
  }
  return worst;
}

/// Minimal ln C with u_n <= C base^n for n <= N (log_base = ln base).
inline double growth_log_constant(const SequenceProbe& u, double log_base) {
  double worst = kNegInf;
  for (long n = 0; n <= u.horizon(); ++n) {
    if (u.log(n) == kNegInf) continue;
    worst = std::max(worst, u.log(n) - static_cast<double>(n) * log_base);
  }
  return worst;
}

struct WindowedReport {
  long kappa = 1;
  double log_base = 0.0;         // ln u, from (1/N) ln U_N
  double root_oscillation = 0.0; // max - min of (1/n) ln U_n over the tail
  bool root_converged = false;
  double log_C = 0.0;            // minimal ln C with u_n <= C u^n at horizon N
  double log_C_half = 0.0;       // same quantity computed at horizon N/2
  bool C_stable = false;
  double intermediate_slack = 0.0;  // min of ln((2kappa+1) U_{k+l+kappa}) - ln(u_k (U_l - U_{kappa-1}))
  bool base_below_one = false;
  double base() const { return std::exp(log_base); }
};

/// Windowed supermultiplicativity: validates the hypothesis
/// u_k u_l <= sum_{|i-k-l|<=kappa} u_i exhaustively, then examines the
/// convergence of U_n^{1/n}, the constant in u_n <= C u^n, and the
/// intermediate bound u_k (U_l - U_{kappa-1}) <= (2 kappa + 1) U_{k+l+kappa}.
inline WindowedReport windowed_check(const SequenceProbe& u, long kappa, double eps = 1e-2,
                             double c_stability = 1.0) {
  if (kappa < 1) throw InvalidArgument("kappa must be >= 1");
  const long N = u.horizon();
  if (N < 4 * kappa + 4) throw InsufficientData("horizon too short for the window");
  for (long k = kappa; k <= N; ++k) {
    for (long l = k; k + l + kappa <= N; ++l) {
      const double lhs = u.log(k) + u.log(l);
      if (lhs == kNegInf) continue;
      const double rhs = detail::log_window_sum(u.logs(), k + l - kappa, k + l + kappa);
      if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) {
        throw HypothesisViolated("u_k u_l exceeds its window sum", k, l);
      }
    }
  }
  WindowedReport rep;
  rep.kappa = kappa;
  const std::vector<double> U = u.log_partial_sums();
  auto rate_at = [&](long n) { return U[static_cast<std::size_t>(n)] / static_cast<double>(n); };
  double hi = kNegInf, lo = std::numeric_limits<double>::infinity();
  for (long n = detail::tail_start(N); n <= N; ++n) {
    hi = std::max(hi, rate_at(n));
    lo = std::min(lo, rate_at(n));
  }
  rep.root_oscillation = hi - lo;
  rep.root_converged = rep.root_oscillation < eps;
  rep.log_base = rate_at(N);
  rep.base_below_one = rep.log_base < 0.0;
  rep.log_C = growth_log_constant(u, rep.log_base);
  const SequenceProbe half = u.truncated(N / 2);
  rep.log_C_half = growth_log_constant(half, rate_at(N / 2));
  rep.C_stable = std::isfinite(rep.log_C) && std::abs(rep.log_C - rep.log_C_half) <= c_stability;

  rep.intermediate_slack = std::numeric_limits<double>::infinity();
  const double log_width = std::log(static_cast<double>(2 * kappa + 1));
  // tail[l] = ln(U_l - U_{kappa-1}).
  std::vector<double> tail(static_cast<std::size_t>(N + 1), kNegInf);
  for (long l = kappa; l <= N; ++l) {
    tail[static_cast<std::size_t>(l)] = log_add(l > kappa ? tail[static_cast<std::size_t>(l - 1)] : kNegInf, u.log(l));
  }
  for (long k = kappa; k <= N; ++k) {
    for (long l = kappa; k + l + kappa <= N; ++l) {
      const double lhs = u.log(k) + tail[static_cast<std::size_t>(l)];
      if (lhs == kNegInf) continue;
      const double rhs = log_width + U[static_cast<std::size_t>(k + l + kappa)];
      rep.intermediate_slack = std::min(rep.intermediate_slack, rhs - lhs);
    }
  }
  return rep;
}

/// ln of the largest c for which w = v / c satisfies w_{n+m} <= W_n W_m,
/// i.e. c = min V_n V_m / v_{n+m} with V_n = v_1 + ... + v_n.
inline double divergence_log_scale(const SequenceProbe& v) {
  const long N = v.horizon();
  std::vector<double> V(static_cast<std::size_t>(N + 1), kNegInf);
  for (long n = 1; n <= N; ++n) V[static_cast<std::size_t>(n)] = log_add(V[static_cast<std::size_t>(n - 1)], v.log(n));
  double worst = kNegInf;
  for (long n = 1; n <= N; ++n) {
    for (long m = n; n + m <= N; ++m) {
      const double lhs = v.log(n + m);
      if (lhs == kNegInf) continue;
      worst = std::max(worst, lhs - V[static_cast<std::size_t>(n)] - V[static_cast<std::size_t>(m)]);
    }
  }
  return -worst;
}

struct DivergenceReport {
  double L = 0.0;          // min_{n>=1} ln W~_n / n
  long argmin = 0;
  double L_slope = 0.0;    // least-squares slope of ln W~_n over the second half
  bool subadditive = false;
  double worst_subadditivity = 0.0;  // max of ln W~_{n+m} - ln W~_n - ln W~_m
  double min_normalized = 0.0;       // min over the tail of ln(W~_n e^{-Ln})
};

/// With W_n = w_1 + ... + w_n and W~_n = 1 + W_1 + ... + W_n: validates
/// w_{n+m} <= W_n W_m, checks subadditivity of ln W~ exhaustively and
/// extracts the growth rate L.
inline DivergenceReport divergence_argument_check(const SequenceProbe& w) {
  const long N = w.horizon();
  if (N < 4) throw InsufficientData("horizon too short");
  std::vector<double> W(static_cast<std::size_t>(N + 1), kNegInf);
  std::vector<double> Wt(static_cast<std::size_t>(N + 1), 0.0);
  for (long n = 1; n <= N; ++n) {
    W[static_cast<std::size_t>(n)] = log_add(W[static_cast<std::size_t>(n - 1)], w.log(n));
    Wt[static_cast<std::size_t>(n)] = log_add(Wt[static_cast<std::size_t>(n - 1)], W[static_cast<std::size_t>(n)]);
  }
  for (long n = 1; n <= N; ++n) {
    for (long m = n; n + m <= N; ++m) {
      const double lhs = w.log(n + m);
      const double rhs = W[static_cast<std::size_t>(n)] + W[static_cast<std::size_t>(m)];
      if (lhs != kNegInf && lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) {
        throw HypothesisViolated("w_{n+m} exceeds W_n W_m", n, m);
      }
    }
  }
  DivergenceReport rep;
  rep.worst_subadditivity = kNegInf;
  for (long n = 1; n <= N; ++n) {
    for (long m = n; n + m <= N; ++m) {
      rep.worst_subadditivity =
          std::max(rep.worst_subadditivity, Wt[static_cast<std::size_t>(n + m)] -
                                                Wt[static_cast<std::size_t>(n)] - Wt[static_cast<std::size_t>(m)]);
    }
  }
  rep.subadditive = rep.worst_subadditivity <= 1e-12 * std::max(1.0, Wt.back());
  rep.L = std::numeric_limits<double>::infinity();
  for (long n = 1; n <= N; ++n) {
    const double r = Wt[static_cast<std::size_t>(n)] / static_cast<double>(n);
    if (r < rep.L) {
      rep.L = r;
      rep.argmin = n;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (long n = N / 2; n <= N; ++n) {
    const double x = static_cast<double>(n), y = Wt[static_cast<std::size_t>(n)];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1;
  }
  const double mx = sx / cnt, my = sy / cnt;
  rep.L_slope = (sxy / cnt - mx * my) / (sxx / cnt - mx * mx);
  rep.min_normalized = std::numeric_limits<double>::infinity();
  for (long n = detail::tail_start(N); n <= N; ++n) {
    rep.min_normalized = std::min(rep.min_normalized,
                                  Wt[static_cast<std::size_t>(n)] - rep.L * static_cast<double>(n));
  }
  return rep;
}

}  // namespace kleinian
