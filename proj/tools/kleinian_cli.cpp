// kleinian: orbit censuses, exponent estimates, separation certificates and
// orbital measures for discrete groups of the hyperbolic plane.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kleinian/acceptance.hpp"
#include "kleinian/commands.hpp"
#include "kleinian/io.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<long> max_word_length;
  std::optional<double> max_radius;
  std::optional<std::string> s_grid;
  std::optional<std::string> window;
  std::optional<double> r;
  bool render = false;
  std::optional<std::string> audit;
  std::string filter;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

kleinian::RunConfig resolve(const Flags& f) {
  using namespace kleinian;
  if (f.config.empty()) throw ConfigError("--config is required for this command");
  RunConfig cfg = load_run_config(f.config);
  // Overrides go into the hash so the header identifies the effective run.
  std::string overrides;
  if (f.max_word_length) {
    cfg.limits.max_word_length = *f.max_word_length;
    overrides += " max_word_length=" + std::to_string(*f.max_word_length);
  }
  if (f.max_radius) {
    cfg.limits.max_radius = *f.max_radius;
    overrides += " max_radius=" + format_sig(*f.max_radius, 17);
  }
  if (f.s_grid) {
    cfg.s_grid = parse_s_grid(*f.s_grid);
    overrides += " s_grid=" + *f.s_grid;
  }
  if (f.window) {
    cfg.window = parse_window(*f.window);
    overrides += " window=" + *f.window;
  }
  if (f.r) {
    cfg.r = *f.r;
    overrides += " r=" + format_sig(*f.r, 17);
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!overrides.empty()) cfg.config_hash = hex64(fnv1a64(cfg.config_hash + overrides));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace kleinian;
  CLI::App app{"Orbit counting, critical exponents and orbital measures for discrete groups of the hyperbolic plane"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Flags f;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "group or run config (JSON)");
    sub->add_option("--max-word-length", f.max_word_length, "word-length bound for the enumeration");
    sub->add_option("--max-radius", f.max_radius, "radius bound R for the enumeration");
    sub->add_option("--s-grid", f.s_grid, "exponent grid lo:hi:step (separation)");
    sub->add_option("--window", f.window, "fit window lo:hi for the exponent estimate");
    sub->add_option("--r", f.r, "shadow radius");
    sub->add_option("--seed", f.seed, "seed for randomized audits; recorded in every output header");
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
  };

  CLI::App* census = app.add_subcommand("census", "enumerate an orbit census and write census.csv");
  CLI::App* exponent = app.add_subcommand("exponent", "estimate the critical exponent (report.csv, estimate.json)");
  CLI::App* separation = app.add_subcommand("separation", "certify an exponent gap for a subgroup (certificate.json)");
  CLI::App* patterson = app.add_subcommand("patterson", "orbital measures, histograms, density image and audits");
  CLI::App* check = app.add_subcommand("check", "run the acceptance suite and print a JSON summary");
  for (CLI::App* sub : {census, exponent, separation, patterson, check}) add_common(sub);
  patterson->add_flag("--render", f.render, "write density.ppm for the first measure");
  patterson->add_option("--audit", f.audit, "conformal | equivariance | shadow")
      ->check(CLI::IsMember({"conformal", "equivariance", "shadow"}));
  check->add_option("--filter", f.filter, "run only criteria with this tag, name or id (e.g. sequences)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::config;
  }

  const std::filesystem::path out_dir(f.out);
  return run_guarded([&]() -> int {
    if (check->parsed()) {
      OutputHeader h;
      h.seed = f.seed.value_or(1);
      h.config_hash = hex64(fnv1a64("check " + f.filter));
      std::filesystem::create_directories(out_dir);
      std::ostringstream summary;
      const int rc = cmd_check(f.filter, h.seed, std::cerr, summary, h);
      std::cout << summary.str();
      std::ofstream(out_dir / "check.json") << summary.str();
      return rc;
    }
    const RunConfig cfg = resolve(f);
    if (census->parsed()) return cmd_census(cfg, out_dir, std::cout);
    if (exponent->parsed()) return cmd_exponent(cfg, out_dir, std::cout);
    if (separation->parsed()) return cmd_separation(cfg, out_dir, std::cout);
    PattersonOptions opt;
    opt.render = f.render;
    opt.audit = f.audit;
    return cmd_patterson(cfg, opt, out_dir, std::cout);
  });
}
