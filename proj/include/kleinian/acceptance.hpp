#pragma once
//
// Acceptance criteria 1-13 on built-in groups. Shared by `kleinian check`
// and the acceptance test binary.
//

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kleinian/catalog.hpp"
#include "kleinian/commands.hpp"
#include "kleinian/counting.hpp"
#include "kleinian/groups.hpp"
#include "kleinian/io.hpp"
#include "kleinian/patterson.hpp"
#include "kleinian/sequences.hpp"

namespace kleinian::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string tag;
  bool passed = false;
  double seconds = 0.0;
  double budget = 0.0;  // seconds; 0 means none
  json measured = json::object();
  std::string note;

  json to_json() const {
    return {{"id", id},           {"name", name},         {"tag", tag},   {"passed", passed},
            {"seconds", seconds}, {"budget_seconds", budget}, {"measured", measured}, {"note", note}};
  }
};

/// Censuses shared between criteria, computed on first use.
class Workspace {
 public:
  explicit Workspace(std::uint64_t seed = 1) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  static constexpr double kSchottkyRadius = 28.0;
  static constexpr double kLatticeRadius = 12.0;

  const OrbitCensus& schottky() {
    if (!schottky_) schottky_ = enumerate(catalog::schottky(), Point::i(), Point::i(), radius(kSchottkyRadius));
    return *schottky_;
  }
  const CountingReport& schottky_report() {
    if (!schottky_report_) schottky_report_ = counting_report(schottky());
    return *schottky_report_;
  }
  const ExponentEstimate& schottky_estimate() {
    if (!schottky_estimate_) schottky_estimate_ = estimate_exponent(schottky_report());
    return *schottky_estimate_;
  }
  const OrbitCensus& lattice() {
    if (!lattice_) lattice_ = enumerate(catalog::lattice(), Point::i(), Point::i(), radius(kLatticeRadius));
    return *lattice_;
  }
  const CountingReport& lattice_report() {
    if (!lattice_report_) lattice_report_ = counting_report(lattice());
    return *lattice_report_;
  }
  const ExponentEstimate& lattice_estimate() {
    if (!lattice_estimate_) lattice_estimate_ = estimate_exponent(lattice_report());
    return *lattice_estimate_;
  }

  static EnumerationLimits radius(double R) {
    EnumerationLimits lim;
    lim.max_radius = R;
    return lim;
  }

 private:
  std::uint64_t seed_;
  std::optional<OrbitCensus> schottky_;
  std::optional<CountingReport> schottky_report_;
  std::optional<ExponentEstimate> schottky_estimate_;
  std::optional<OrbitCensus> lattice_;
  std::optional<CountingReport> lattice_report_;
  std::optional<ExponentEstimate> lattice_estimate_;
};

struct Criterion {
  int id;
  const char* name;
  const char* tag;
  double budget;
  std::function<void(Workspace&, CriterionResult&)> body;
};

namespace detail {

inline json estimate_json(const ExponentEstimate& e) {
  return {{"point_estimate", e.point_estimate},
          {"window", json::array({e.window_lo, e.window_hi})},
          {"spread", e.spread}};
}

// --- 1-4: exponents of the basic examples ----------------------------------

inline void parabolic_distance_law(Workspace&, CriterionResult& r) {
  const Isometry p = catalog::parabolic_generator();
  double worst = 0.0;
  long worst_n = 0;
  for (long n = 10; n <= 10000; ++n) {
    const double dev = std::abs(distance(Point::i(), apply(p.pow(n), Point::i())) - 2.0 * std::log(n));
    if (dev > worst) {
      worst = dev;
      worst_n = n;
    }
  }
  r.measured = {{"max_deviation", worst}, {"at_n", worst_n}};
  r.passed = worst <= 0.05;
}

inline void exponent_of(const GroupSpec& spec, double R, CriterionResult& r,
                        const std::function<bool(const ExponentEstimate&, const OrbitCensus&)>& ok) {
  const OrbitCensus c = enumerate(spec, Point::i(), Point::i(), Workspace::radius(R));
  const ExponentEstimate e = estimate_exponent(counting_report(c));
  r.measured = estimate_json(e);
  r.measured["census_size"] = c.size();
  r.measured["max_radius"] = R;
  r.passed = ok(e, c);
}

inline void parabolic_exponent(Workspace&, CriterionResult& r) {
  exponent_of(catalog::parabolic(), 18.0, r, [](const ExponentEstimate& e, const OrbitCensus&) {
    return e.point_estimate >= 0.45 && e.point_estimate <= 0.55;
  });
}

inline void cyclic_exponent(Workspace&, CriterionResult& r) {
  exponent_of(catalog::cyclic_hyperbolic(), 30.0, r,
              [](const ExponentEstimate& e, const OrbitCensus&) { return e.point_estimate <= 0.05; });
}

inline void lattice_exponent(Workspace& ws, CriterionResult& r) {
  const ExponentEstimate& e = ws.lattice_estimate();
  r.measured = estimate_json(e);
  r.measured["census_size"] = ws.lattice().size();
  r.passed = e.point_estimate >= 0.9 && e.point_estimate <= 1.1 && ws.lattice().size() >= 10000;
}

// --- 5-6: limit behavior and two-sided growth -------------------------------

inline void limit_behavior(Workspace& ws, CriterionResult& r) {
  bool ok = true;
  auto one = [&](const char* label, const CountingReport& rep, double R) {
    const double full = slope_spread(rep, R);
    const double half = slope_spread(rep, R / 2.0);
    r.measured[label] = {{"r_max", R}, {"spread_at_r_max", full}, {"spread_at_half", half}};
    ok = ok && full < 0.5 * half;
  };
  one("lattice", ws.lattice_report(), Workspace::kLatticeRadius);
  one("schottky", ws.schottky_report(), Workspace::kSchottkyRadius);
  r.passed = ok;
}

inline void two_sided_growth(Workspace& ws, CriterionResult& r) {
  const double dh = ws.lattice_estimate().point_estimate;
  const BoundednessAudit a = boundedness_audit(ws.lattice_report(), dh, 6.0, 12.0);
  r.measured = {{"delta_hat", dh}, {"sup", a.sup_ratio}, {"inf", a.inf_ratio}, {"ratio", a.spread()}};
  r.passed = a.spread() <= 20.0;
}

// --- 7-8: separation and conjugation ---------------------------------------

inline void separation(Workspace& ws, CriterionResult& r) {
  const PingPongCertificate cert = verify_ping_pong({catalog::schottky_a(), catalog::schottky_b()});
  const OrbitCensus h = enumerate(GroupSpec::cyclic(catalog::schottky_a()), Point::i(), Point::i(),
                                  Workspace::radius(Workspace::kSchottkyRadius));
  const SeparationCertificate sc = separation_certificate(h, catalog::schottky_b(), SGrid{0.0, 1.0, 0.01});
  const ExponentEstimate& e = ws.schottky_estimate();
  r.measured = {{"ping_pong_margin", cert.margin}, {"s0", sc.s0},       {"product", sc.product},
                {"delta_hat", e.point_estimate},   {"spread", e.spread}};
  r.passed = sc.s0 >= 0.05 && sc.s0 <= e.point_estimate + e.spread;
}

inline void conjugation_invariance(Workspace&, CriterionResult& r) {
  const EnumerationLimits lim = Workspace::radius(Workspace::kSchottkyRadius);
  const ExponentEstimate e1 =
      estimate_exponent(counting_report(enumerate(catalog::nested(4), Point::i(), Point::i(), lim)));
  const ExponentEstimate e2 =
      estimate_exponent(counting_report(enumerate(catalog::nested_conjugate(4), Point::i(), Point::i(), lim)));
  const double diff = std::abs(e1.point_estimate - e2.point_estimate);
  r.measured = {{"nested", estimate_json(e1)}, {"conjugate", estimate_json(e2)}, {"difference", diff}};
  r.passed = diff <= e1.spread + e2.spread;
}

// --- 9: sequence suites ----------------------------------------------------

inline bool comparison_suite(std::mt19937_64& rng, json& out) {
  std::uniform_real_distribution<double> rate(0.05, 1.5), amp(0.0, 1.0), unit(-1.0, 1.0), power(0.0, 2.0);
  double worst = 0.0;
  bool classes = true;
  const long N = 2000;
  for (int t = 0; t < 200; ++t) {
    const double d = rate(rng);
    const double a = amp(rng);
    const double k = t % 2 == 0 ? 0.0 : power(rng);
    std::vector<double> logs(static_cast<std::size_t>(N + 1));
    for (long n = 0; n <= N; ++n) {
      logs[static_cast<std::size_t>(n)] = d * static_cast<double>(n) + k * std::log1p(static_cast<double>(n)) + a * unit(rng);
    }
    const SeriesComparisonReport rep = series_comparison_check(SequenceProbe::from_logs(logs), {d - 0.2, d - 0.05, d + 0.05, d + 0.2});
    worst = std::max(worst, rep.agreement);
    classes = classes && rep.classifications_agree();
  }
  out["series_comparison"] = {{"sequences", 200}, {"max_agreement_gap", worst}, {"classifications_agree", classes}};
  return worst <= 1e-2 && classes;
}

inline bool fekete_suite(json& out) {
  const long N = 60;
  double worst = 0.0;
  bool argmin_ok = true;
  auto run = [&](const std::function<double(long)>& log_u, double expected_inf) {
    std::vector<double> logs;
    for (long n = 0; n <= N; ++n) logs.push_back(log_u(n));
    const FeketeReport rep = fekete_check(SequenceProbe::from_logs(logs));
    worst = std::max(worst, std::abs(rep.log_inf_root - expected_inf));
    argmin_ok = argmin_ok && (rep.argmin == N || std::abs(expected_inf - log_u(1)) < 1e-15);
  };
  for (double c : {1.0, 2.0, 10.0}) {
    for (double a : {0.5, 1.0, 3.0}) {
      // c a^n: roots a c^{1/k} decrease, the infimum is at k = N.
      run([&](long n) { return std::log(c) + static_cast<double>(n) * std::log(a); },
          std::log(a) + std::log(c) / static_cast<double>(N));
      // (n + 1) a^n.
      run([&](long n) { return std::log1p(static_cast<double>(n)) + static_cast<double>(n) * std::log(a); },
          std::log(a) + std::log1p(static_cast<double>(N)) / static_cast<double>(N));
    }
  }
  // a^n / (n + 1) is not submultiplicative; the first witness is (1, 1).
  bool witness_ok = false;
  try {
    std::vector<double> logs;
    for (long n = 0; n <= N; ++n) logs.push_back(0.5 * static_cast<double>(n) - std::log1p(static_cast<double>(n)));
    fekete_check(SequenceProbe::from_logs(logs));
  } catch (const NotSubmultiplicative& e) {
    witness_ok = e.first() == 1 && e.second() == 1;
  }
  out["fekete"] = {{"families", 18}, {"max_error", worst}, {"argmin_at_horizon", argmin_ok},
                   {"witness_detected", witness_ok}};
  return worst <= 1e-12 && argmin_ok && witness_ok;
}

inline bool windowed_passes(const WindowedReport& f) {
  return f.root_converged && f.C_stable && f.intermediate_slack >= -1e-12;
}

inline bool windowed_suite(Workspace& ws, json& out) {
  bool ok = true;
  json rows = json::array();
  for (double d : {0.3, 0.7}) {
    std::vector<double> logs;
    for (long n = 0; n <= 80; ++n) logs.push_back(d * static_cast<double>(n));
    const WindowedReport f = windowed_check(SequenceProbe::from_logs(logs), 1);
    rows.push_back({{"delta", d}, {"log_base", f.log_base}, {"oscillation", f.root_oscillation},
                    {"log_C", f.log_C}, {"intermediate_slack", f.intermediate_slack}});
    ok = ok && windowed_passes(f) && std::abs(f.log_base - d) < 0.05;
  }
  // Annular counts n(n, 1) of the Schottky group, renormalized by the measured constant.
  const OrbitCensus& c = ws.schottky();
  std::vector<double> u;
  for (long n = 0; n + 1 <= static_cast<long>(Workspace::kSchottkyRadius); ++n) {
    u.push_back(static_cast<double>(annular_count(c, static_cast<double>(n), 1.0)));
  }
  const SequenceProbe raw = SequenceProbe::from_values(u);
  const long kappa = 1;
  const double log_c = window_log_constant(raw, kappa);
  const WindowedReport f = windowed_check(raw.scaled(-log_c), kappa, 2e-2);
  rows.push_back({{"schottky_annular", true}, {"kappa", kappa}, {"measured_log_C", log_c},
                  {"log_base", f.log_base}, {"oscillation", f.root_oscillation},
                  {"intermediate_slack", f.intermediate_slack}});
  ok = ok && windowed_passes(f);
  out["windowed"] = rows;
  return ok;
}

inline bool divergence_suite(json& out) {
  bool ok = true;
  json rows = json::array();
  for (double L : {0.2, 0.5, 1.0}) {
    std::vector<double> logs;
    for (long n = 0; n <= 120; ++n) logs.push_back(L * static_cast<double>(n));
    const SequenceProbe v = SequenceProbe::from_logs(logs);
    const double log_c = divergence_log_scale(v);
    const DivergenceReport d = divergence_argument_check(v.scaled(-log_c));
    rows.push_back({{"planted", L}, {"L_slope", d.L_slope}, {"L_min", d.L}, {"subadditive", d.subadditive}});
    ok = ok && d.subadditive && std::abs(d.L_slope - L) <= 1e-2;
  }
  out["divergence"] = rows;
  return ok;
}

inline void sequence_suites(Workspace& ws, CriterionResult& r) {
  std::mt19937_64 rng(ws.seed());
  const bool a = comparison_suite(rng, r.measured);
  const bool b = fekete_suite(r.measured);
  const bool c = windowed_suite(ws, r.measured);
  const bool d = divergence_suite(r.measured);
  r.passed = a && b && c && d;
}

// --- 10-13: measures --------------------------------------------------------

inline void conformality(Workspace& ws, CriterionResult& r) {
  const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), Workspace::radius(22.0));
  const double s = ws.schottky_estimate().point_estimate + 0.05;
  std::mt19937_64 rng(ws.seed() + 10);
  std::uniform_real_distribution<double> re(-1.0, 1.0), im(0.5, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Point xa(re(rng), im(rng));
    const Point xb(re(rng), im(rng));
    const ConformalAudit a = conformal_ratio_audit(orbital_measure(c, s, xa), orbital_measure(c, s, xb), c.x());
    worst = std::max(worst, a.max_deviation);
  }
  r.measured = {{"pairs", 20}, {"atoms", c.size()}, {"s", s}, {"max_deviation", worst}};
  r.passed = worst <= 1e-12;
}

inline void equivariance(Workspace& ws, CriterionResult& r) {
  const double s = ws.schottky_estimate().point_estimate + 0.1;
  const Point x(0.2, 1.3);
  double worst = 0.0;
  json leak = json::object();
  std::vector<double> leakage_b;
  for (long L : {8L, 10L}) {
    EnumerationLimits lim;
    lim.max_word_length = L;
    const OrbitCensus c = enumerate(catalog::schottky(), Point::i(), Point::i(), lim);
    const EquivarianceAudit ea = equivariance_audit(c, catalog::schottky_a(), Word::from_letters({0}), s, x);
    const EquivarianceAudit eb = equivariance_audit(c, catalog::schottky_b(), Word::from_letters({2}), s, x);
    worst = std::max({worst, ea.max_discrepancy, eb.max_discrepancy});
    leakage_b.push_back(eb.leakage);
    leak["L" + std::to_string(L)] = {{"a", ea.leakage}, {"b", eb.leakage}};
  }
  r.measured = {{"s", s}, {"max_discrepancy", worst}, {"leakage", leak}};
  r.passed = worst <= 1e-12 && leakage_b[1] < leakage_b[0];
}

inline void shadow_lemma(Workspace& ws, CriterionResult& r) {
  const double dh = ws.schottky_estimate().point_estimate;
  const OrbitCensus& c = ws.schottky();
  const AtomicMeasure mu = orbital_measure(c, dh + 0.05);
  const ShadowAudit a = shadow_lemma_audit(c, mu, dh, 1.5, 3, 7, c.completeness_radius() / 2.0);
  r.measured = {{"alpha", dh},           {"records", a.records.size()}, {"min_ratio", a.min_ratio},
                {"max_ratio", a.max_ratio}, {"spread", a.spread()}};
  r.passed = !a.records.empty() && !a.radius_too_small && a.min_ratio > 0.0 && a.spread() <= 1e3;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void render_determinism(Workspace& ws, CriterionResult& r) {
  RunConfig cfg;
  cfg.group = catalog::schottky();
  cfg.limits.max_radius = 16.0;
  cfg.seed = ws.seed();
  cfg.config_hash = hex64(fnv1a64(group_spec_to_json(cfg.group).dump()));
  PattersonOptions opt;
  opt.render = true;
  opt.render_size = 256;
  const auto base = std::filesystem::temp_directory_path() /
                    ("kleinian-render-" + std::to_string(std::random_device{}()));
  std::ostringstream sink;
  std::string bytes[2];
  for (int k = 0; k < 2; ++k) {
    const auto dir = base / std::to_string(k);
    if (cmd_patterson(cfg, opt, dir, sink) != exit_code::ok) throw Error("cmd_patterson failed");
    bytes[k] = slurp(dir / "density.ppm");
  }
  std::filesystem::remove_all(base);
  r.measured = {{"bytes", bytes[0].size()}, {"fnv1a", hex64(fnv1a64(bytes[0]))}};
  r.passed = !bytes[0].empty() && bytes[0] == bytes[1];
}

}  // namespace detail

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "parabolic-distance-law", "parabolic", 1.0, detail::parabolic_distance_law},
      {2, "parabolic-exponent", "parabolic", 5.0, detail::parabolic_exponent},
      {3, "cyclic-hyperbolic-exponent", "cyclic", 1.0, detail::cyclic_exponent},
      {4, "modular-lattice-exponent", "lattice", 60.0, detail::lattice_exponent},
      {5, "limit-behavior", "limit", 60.0, detail::limit_behavior},
      {6, "two-sided-growth", "lattice", 0.0, detail::two_sided_growth},
      {7, "separation", "separation", 30.0, detail::separation},
      {8, "conjugation-invariance", "conjugation", 0.0, detail::conjugation_invariance},
      {9, "sequence-suites", "sequences", 30.0, detail::sequence_suites},
      {10, "conformality", "conformal", 0.0, detail::conformality},
      {11, "equivariance", "equivariance", 0.0, detail::equivariance},
      {12, "shadow-lemma", "shadow", 60.0, detail::shadow_lemma},
      {13, "render-determinism", "render", 0.0, detail::render_determinism},
  };
  return all;
}

/// Empty filter selects everything; otherwise matches the tag, the name or the id.
inline bool selected(const Criterion& c, const std::string& filter) {
  return filter.empty() || filter == c.tag || filter == c.name || filter == std::to_string(c.id);
}

inline CriterionResult run_criterion(const Criterion& c, Workspace& ws) {
  CriterionResult r;
  r.id = c.id;
  r.name = c.name;
  r.tag = c.tag;
  r.budget = c.budget;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.body(ws, r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.note = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (c.budget > 0.0 && r.seconds > c.budget) {
    r.passed = false;
    r.note += (r.note.empty() ? "" : "; ") + std::string("over runtime budget");
  }
  return r;
}

inline std::vector<CriterionResult> run(const std::string& filter = "", std::uint64_t seed = 1,
                                        const std::function<void(const CriterionResult&)>& on_result = {}) {
  Workspace ws(seed);
  std::vector<CriterionResult> out;
  for (const Criterion& c : criteria()) {
    if (!selected(c, filter)) continue;
    out.push_back(run_criterion(c, ws));
    if (on_result) on_result(out.back());
  }
  return out;
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "[PASS] " : "[FAIL] ") << (r.id < 10 ? "0" : "") << r.id << ' ' << r.name << ' '
     << r.measured.dump() << " (" << format_sig(r.seconds, 3) << " s)";
  if (!r.note.empty()) os << " -- " << r.note;
  return os.str();
}

}  // namespace kleinian::acceptance

namespace kleinian {

/// Runs the acceptance suite, prints one line per criterion to `log`, writes
/// the JSON summary to `summary` and returns 0 iff every selected criterion passed.
inline int cmd_check(const std::string& filter, std::uint64_t seed, std::ostream& log, std::ostream& summary,
                     const OutputHeader& header) {
  const auto results = acceptance::run(filter, seed, [&](const acceptance::CriterionResult& r) {
    log << acceptance::format_line(r) << "\n" << std::flush;
  });
  if (results.empty()) throw ConfigError("filter '" + filter + "' selects no criterion");
  bool all = true;
  json rows = json::array();
  for (const auto& r : results) {
    all = all && r.passed;
    rows.push_back(r.to_json());
  }
  summary << json{{"header", header.to_json()}, {"passed", all}, {"filter", filter}, {"criteria", rows}}.dump(2)
          << "\n";
  return all ? exit_code::ok : exit_code::failure;
}

}  // namespace kleinian
