#pragma once
//
// The CLI subcommands as library calls. Each writes artifacts under an output
// directory, prints a short summary and returns a process exit code.
//

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kleinian/counting.hpp"
#include "kleinian/errors.hpp"
#include "kleinian/groups.hpp"
#include "kleinian/io.hpp"
#include "kleinian/patterson.hpp"

namespace kleinian {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int config = 2;
inline constexpr int budget = 3;
inline constexpr int overflow = 4;
inline constexpr int insufficient_data = 5;
inline constexpr int no_certificate = 6;
inline constexpr int degenerate_normalizer = 7;
}  // namespace exit_code

/// Runs `body`, mapping library exceptions to exit codes and printing the message.
inline int run_guarded(const std::function<int()>& body, std::ostream& err = std::cerr) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return exit_code::config;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return exit_code::budget;
  } catch (const OverflowError& e) {
    err << "overflow: " << e.what() << "\n";
    return exit_code::overflow;
  } catch (const InsufficientData& e) {
    err << "insufficient data: " << e.what() << "\n";
    return exit_code::insufficient_data;
  } catch (const IncompleteCensus& e) {
    err << "incomplete census: " << e.what() << "\n";
    return exit_code::insufficient_data;
  } catch (const NoCertificate& e) {
    err << "no certificate: " << e.what() << "\n";
    return exit_code::no_certificate;
  } catch (const DegenerateNormalizer& e) {
    err << "degenerate normalizer: " << e.what() << "\n";
    return exit_code::degenerate_normalizer;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_from_text(ss.str());
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name,
                                 bool binary = false) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write " + (dir / name).string());
  return out;
}

inline OrbitCensus census_for(const RunConfig& cfg) { return enumerate(cfg.group, cfg.x, cfg.y, cfg.limits); }

inline std::string s_tag(std::size_t k) { return "s" + std::to_string(k); }

}  // namespace detail

inline int cmd_census(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  const OrbitCensus census = detail::census_for(cfg);
  auto out = detail::open_output(out_dir, "census.csv");
  write_census_csv(out, census, cfg.header());
  log << "entries " << census.size() << "\n";
  log << "completeness_radius " << format_sig(census.completeness_radius()) << "\n";
  log << "certified " << (census.certified() ? "true" : "false") << "\n";
  return exit_code::ok;
}

inline int cmd_exponent(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  const OrbitCensus census = detail::census_for(cfg);
  const CountingReport rep = counting_report(census, 0.5, std::nullopt, cfg.delta);
  const ExponentEstimate est = estimate_exponent(rep, cfg.window);
  {
    auto out = detail::open_output(out_dir, "report.csv");
    write_report_csv(out, rep, cfg.header());
  }
  {
    auto out = detail::open_output(out_dir, "estimate.json");
    out << estimate_to_json(est, cfg.header()).dump(2) << "\n";
  }
  log << "point_estimate " << format_sig(est.point_estimate, 6) << "\n";
  log << "window " << format_sig(est.window_lo) << ":" << format_sig(est.window_hi) << "\n";
  log << "spread " << format_sig(est.spread, 6) << "\n";
  return exit_code::ok;
}

/// Needs "subgroup" and "witness" in the config; the subgroup census is taken
/// at x = y = cfg.x with the configured limits.
inline int cmd_separation(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  if (!cfg.subgroup || !cfg.witness) throw ConfigError("separation needs 'subgroup' and 'witness'");
  const OrbitCensus h = enumerate(*cfg.subgroup, cfg.x, cfg.x, cfg.limits);
  const SGrid grid = cfg.s_grid.value_or(SGrid{0.0, 2.0, 0.01});
  const SeparationCertificate cert = separation_certificate(h, *cfg.witness, grid);
  auto out = detail::open_output(out_dir, "certificate.json");
  out << certificate_to_json(cert, cfg.header()).dump(2) << "\n";
  log << "s0 " << format_sig(cert.s0, 6) << "\n";
  log << "product " << format_sig(cert.product, 6) << "\n";
  return exit_code::ok;
}

struct PattersonOptions {
  bool render = false;
  int render_size = 512;
  std::optional<std::string> audit;  // conformal | equivariance | shadow
};

/// Measures at each s of the s-list (default: the exponent estimate plus 0.1,
/// 0.05, 0.02), their boundary histograms, an optional density image of the
/// first measure and an optional audit.
inline int cmd_patterson(const RunConfig& cfg, const PattersonOptions& opt,
                         const std::filesystem::path& out_dir, std::ostream& log) {
  if (opt.audit && *opt.audit != "conformal" && *opt.audit != "equivariance" && *opt.audit != "shadow") {
    throw ConfigError("unknown audit '" + *opt.audit + "'");
  }
  const OrbitCensus census = detail::census_for(cfg);
  const double horizon = census.completeness_radius() / 2.0;
  std::optional<double> delta_hat;
  auto estimate = [&] {
    if (!delta_hat) {
      delta_hat = estimate_exponent(counting_report(census, 0.5, std::nullopt, cfg.delta), cfg.window)
                      .point_estimate;
    }
    return *delta_hat;
  };
  std::vector<double> s_list = cfg.s_list;
  if (s_list.empty()) {
    for (double eps : {0.1, 0.05, 0.02}) s_list.push_back(estimate() + eps);
  }
  const OutputHeader header = cfg.header();
  std::vector<AtomicMeasure> measures;
  for (std::size_t k = 0; k < s_list.size(); ++k) {
    measures.push_back(orbital_measure(census, s_list[k], cfg.x));
    {
      auto out = detail::open_output(out_dir, "measure_" + detail::s_tag(k) + ".csv");
      write_measure_csv(out, measures.back(), header);
    }
    {
      auto out = detail::open_output(out_dir, "histogram_" + detail::s_tag(k) + ".csv");
      write_histogram_csv(out, boundary_histogram(measures.back(), cfg.histogram_bins, horizon), header);
    }
    log << "measure " << detail::s_tag(k) << " s=" << format_sig(s_list[k], 6)
        << " atoms=" << measures.back().atoms().size() << "\n";
  }
  if (opt.render) {
    auto out = detail::open_output(out_dir, "density.ppm", true);
    write_ppm(out, render_density(measures.front(), opt.render_size), header);
    log << "render density.ppm\n";
  }
  if (!opt.audit) return exit_code::ok;

  const double s = s_list.front();
  json result = {{"header", header.to_json()}, {"audit", *opt.audit}, {"s", s}};
  if (*opt.audit == "conformal") {
    // Random basepoint pairs in the box [-1, 1] x [0.5, 2]; the seed fixes them.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> re(-1.0, 1.0), im(0.5, 2.0);
    double worst = 0.0, worst_far = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Point xa(re(rng), im(rng));
      const Point xb(re(rng), im(rng));
      const ConformalAudit a = conformal_ratio_audit(orbital_measure(census, s, xa),
                                                     orbital_measure(census, s, xb), census.x());
      worst = std::max(worst, a.max_deviation);
      worst_far = std::max(worst_far, a.max_far_gap);
    }
    result["pairs"] = 20;
    result["max_deviation"] = worst;
    result["max_far_gap"] = worst_far;
    log << "conformal max_deviation " << format_sig(worst, 3) << "\n";
  } else if (*opt.audit == "equivariance") {
    const std::vector<Isometry> letters = letter_isometries(cfg.group);
    if (letters.empty() || !census.has_words()) {
      throw ConfigError("equivariance audit needs a group enumerated with words");
    }
    const EquivarianceAudit a =
        equivariance_audit(census, letters.front(), Word::from_letters({0}), s, cfg.x);
    result["max_discrepancy"] = a.max_discrepancy;
    result["leakage"] = a.leakage;
    result["matched"] = a.matched;
    result["unmatched"] = a.unmatched;
    log << "equivariance max_discrepancy " << format_sig(a.max_discrepancy, 3) << " leakage "
        << format_sig(a.leakage, 4) << "\n";
  } else {
    const ShadowAudit a = shadow_lemma_audit(census, measures.front(), estimate(), cfg.r,
                                             cfg.shadow_min_length, cfg.shadow_max_length, horizon);
    result["alpha"] = estimate();
    result["r"] = cfg.r;
    result["records"] = a.records.size();
    result["min_ratio"] = a.min_ratio;
    result["max_ratio"] = a.max_ratio;
    result["radius_too_small"] = a.radius_too_small;
    log << "shadow min_ratio " << format_sig(a.min_ratio, 4) << " max_ratio " << format_sig(a.max_ratio, 4)
        << " records " << a.records.size() << "\n";
  }
  auto out = detail::open_output(out_dir, "audit_" + *opt.audit + ".json");
  out << result.dump(2) << "\n";
  return exit_code::ok;
}

}  // namespace kleinian
