#pragma once
//
// JSON configs, CSV/JSON/PPM artifacts.
//

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kleinian/counting.hpp"
#include "kleinian/errors.hpp"
#include "kleinian/groups.hpp"
#include "kleinian/patterson.hpp"
#include "kleinian/sequences.hpp"

namespace kleinian {

inline constexpr const char* kToolVersion = "0.1.0";

using json = nlohmann::json;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Recorded at the top of every artifact.
struct OutputHeader {
  std::string config_hash = "0000000000000000";
  std::uint64_t seed = 0;

  std::string comment(const std::string& prefix = "# ") const {
    return prefix + "kleinian " + kToolVersion + " config=" + config_hash + " seed=" + std::to_string(seed);
  }
  json to_json() const {
    return {{"tool", "kleinian"}, {"version", kToolVersion}, {"config_hash", config_hash}, {"seed", seed}};
  }
};

/// %.<digits>g formatting.
inline std::string format_sig(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// --- numbers and matrices ---------------------------------------------------

/// Accepts JSON numbers, decimal strings ("0.25", "-1e-3") and fractions ("15/8").
inline double parse_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw ConfigError("expected a number or numeric string, got " + j.dump());
  const std::string s = j.get<std::string>();
  auto parse_decimal = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + s + "'");
    }
    if (used != t.size()) throw ConfigError("cannot parse number '" + s + "'");
    return v;
  };
  const std::size_t slash = s.find('/');
  if (slash == std::string::npos) return parse_decimal(s);
  const double num = parse_decimal(s.substr(0, slash));
  const double den = parse_decimal(s.substr(slash + 1));
  if (den == 0.0) throw ConfigError("zero denominator in '" + s + "'");
  return num / den;
}

inline Isometry parse_matrix(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 ||
      j[1].size() != 2) {
    throw ConfigError("matrix must be [[a, b], [c, d]]");
  }
  try {
    return Isometry(parse_number(j[0][0]), parse_number(j[0][1]), parse_number(j[1][0]),
                    parse_number(j[1][1]));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid matrix: ") + e.what());
  }
}

inline json matrix_to_json(const Isometry& g) {
  return json::array({json::array({format_sig(g.a(), 17), format_sig(g.b(), 17)}),
                      json::array({format_sig(g.c(), 17), format_sig(g.d(), 17)})});
}

inline Point parse_point(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("point must be [re, im]");
  try {
    return Point(parse_number(j[0]), parse_number(j[1]));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid point: ") + e.what());
  }
}

// --- group specs ------------------------------------------------------------

inline GroupSpec group_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("group spec must be a JSON object");
  if (j.contains("model") && j["model"] != "upper_half_plane") {
    throw ConfigError("unsupported model " + j["model"].dump());
  }
  if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("group spec needs a string 'kind'");
  GroupSpec spec;
  try {
    spec.kind = group_kind_from_string(j["kind"].get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("generators")) {
    if (!j["generators"].is_array()) throw ConfigError("'generators' must be a list of matrices");
    for (const json& m : j["generators"]) spec.generators.push_back(parse_matrix(m));
  }
  if (j.contains("depth")) {
    if (!j["depth"].is_number_integer()) throw ConfigError("'depth' must be an integer");
    spec.depth = j["depth"].get<int>();
  }
  switch (spec.kind) {
    case GroupKind::schottky:
      if (spec.generators.empty()) throw ConfigError("schottky spec needs generators");
      break;
    case GroupKind::cyclic_hyperbolic:
    case GroupKind::cyclic_parabolic:
      if (spec.generators.size() != 1) throw ConfigError("cyclic spec needs exactly one generator");
      break;
    case GroupKind::modular_lattice:
      if (!spec.generators.empty()) throw ConfigError("modular_lattice takes no generators");
      break;
    case GroupKind::nested_subgroup:
      if (spec.generators.size() != 2) throw ConfigError("nested_subgroup needs generators [alpha, beta]");
      if (spec.depth < 0) throw ConfigError("depth must be >= 0");
      break;
    case GroupKind::conjugated:
      if (!j.contains("conjugator") || !j.contains("inner")) {
        throw ConfigError("conjugated spec needs 'conjugator' and 'inner'");
      }
      spec.conjugator = parse_matrix(j["conjugator"]);
      spec.inner = std::make_shared<const GroupSpec>(group_spec_from_json(j["inner"]));
      break;
  }
  return spec;
}

inline json group_spec_to_json(const GroupSpec& spec) {
  json j = {{"model", "upper_half_plane"}, {"kind", to_string(spec.kind)}};
  if (!spec.generators.empty()) {
    json gens = json::array();
    for (const Isometry& g : spec.generators) gens.push_back(matrix_to_json(g));
    j["generators"] = gens;
  }
  if (spec.kind == GroupKind::nested_subgroup) j["depth"] = spec.depth;
  if (spec.kind == GroupKind::conjugated) {
    j["conjugator"] = matrix_to_json(spec.conjugator);
    j["inner"] = group_spec_to_json(*spec.inner);
  }
  return j;
}

/// Parses JSON text; syntax errors are reported with line and column.
inline json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
}

// --- run configuration ------------------------------------------------------

/// Everything a command needs. A config file is either a bare group spec or
/// an object with a "group" member plus optional parameters.
struct RunConfig {
  GroupSpec group;
  std::optional<GroupSpec> subgroup;  // separation: H
  std::optional<Isometry> witness;    // separation: g
  Point x;
  Point y;
  EnumerationLimits limits;
  std::optional<SGrid> s_grid;
  std::optional<std::pair<double, double>> window;
  double r = 1.5;
  double delta = 1.0;
  std::vector<double> s_list;
  int histogram_bins = 64;
  long shadow_min_length = 3;
  long shadow_max_length = 7;
  std::uint64_t seed = 0;
  std::string config_hash = "0000000000000000";

  OutputHeader header() const { return {config_hash, seed}; }
};

inline SGrid parse_s_grid(const std::string& text) {
  const std::size_t a = text.find(':');
  const std::size_t b = a == std::string::npos ? a : text.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos) throw ConfigError("s-grid must be lo:hi:step");
  SGrid g{parse_number(json(text.substr(0, a))), parse_number(json(text.substr(a + 1, b - a - 1))),
          parse_number(json(text.substr(b + 1)))};
  if (!(g.step > 0.0) || g.hi < g.lo) throw ConfigError("s-grid needs lo <= hi and step > 0");
  return g;
}

inline std::pair<double, double> parse_window(const std::string& text) {
  const std::size_t a = text.find(':');
  if (a == std::string::npos) throw ConfigError("window must be lo:hi");
  const double lo = parse_number(json(text.substr(0, a)));
  const double hi = parse_number(json(text.substr(a + 1)));
  if (!(hi > lo)) throw ConfigError("window needs lo < hi");
  return {lo, hi};
}

inline RunConfig run_config_from_text(const std::string& text) {
  const json doc = parse_json_text(text);
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.config_hash = hex64(fnv1a64(text));
  const json& g = doc.contains("group") ? doc["group"] : doc;
  cfg.group = group_spec_from_json(g);
  try {
    if (doc.contains("subgroup")) cfg.subgroup = group_spec_from_json(doc["subgroup"]);
    if (doc.contains("witness")) cfg.witness = parse_matrix(doc["witness"]);
    if (doc.contains("x")) cfg.x = parse_point(doc["x"]);
    if (doc.contains("y")) cfg.y = parse_point(doc["y"]);
    if (doc.contains("max_word_length")) cfg.limits.max_word_length = doc["max_word_length"].get<long>();
    if (doc.contains("max_radius")) cfg.limits.max_radius = parse_number(doc["max_radius"]);
    if (doc.contains("max_entries")) cfg.limits.max_entries = doc["max_entries"].get<std::size_t>();
    if (doc.contains("threads")) cfg.limits.threads = doc["threads"].get<unsigned>();
    if (doc.contains("s_grid")) cfg.s_grid = parse_s_grid(doc["s_grid"].get<std::string>());
    if (doc.contains("window")) cfg.window = parse_window(doc["window"].get<std::string>());
    if (doc.contains("r")) cfg.r = parse_number(doc["r"]);
    if (doc.contains("delta")) cfg.delta = parse_number(doc["delta"]);
    if (doc.contains("s_list")) {
      for (const json& s : doc["s_list"]) cfg.s_list.push_back(parse_number(s));
    }
    if (doc.contains("histogram_bins")) cfg.histogram_bins = doc["histogram_bins"].get<int>();
    if (doc.contains("shadow_word_lengths")) {
      cfg.shadow_min_length = doc["shadow_word_lengths"].at(0).get<long>();
      cfg.shadow_max_length = doc["shadow_word_lengths"].at(1).get<long>();
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  return cfg;
}

// --- CSV / JSON writers -----------------------------------------------------

inline void write_census_csv(std::ostream& os, const OrbitCensus& c, const OutputHeader& h) {
  os << h.comment() << "\n";
  os << "# completeness_radius=" << format_sig(c.completeness_radius())
     << " certified=" << (c.certified() ? "true" : "false") << " entries=" << c.size() << "\n";
  os << "distance,word_length,a,b,c,d\n";
  for (const CensusEntry& e : c.entries()) {
    os << format_sig(e.distance) << ',' << e.word_length << ',' << format_sig(e.element.a(), 17) << ','
       << format_sig(e.element.b(), 17) << ',' << format_sig(e.element.c(), 17) << ','
       << format_sig(e.element.d(), 17) << '\n';
  }
}

inline void write_report_csv(std::ostream& os, const CountingReport& rep, const OutputHeader& h) {
  os << h.comment() << "\n";
  os << "# delta=" << format_sig(rep.delta) << "\n";
  os << "R,N,n,logN\n";
  for (std::size_t k = 0; k < rep.radii.size(); ++k) {
    os << format_sig(rep.radii[k]) << ',' << rep.counts[k] << ',';
    if (rep.annular[k] >= 0) os << rep.annular[k];
    os << ',';
    if (rep.counts[k] > 0) os << format_sig(std::log(static_cast<double>(rep.counts[k])));
    os << '\n';
  }
}

inline json estimate_to_json(const ExponentEstimate& e, const OutputHeader& h) {
  return {{"header", h.to_json()},
          {"point_estimate", e.point_estimate},
          {"window", json::array({e.window_lo, e.window_hi})},
          {"slopes", e.slopes},
          {"spread", e.spread}};
}

inline json certificate_to_json(const SeparationCertificate& c, const OutputHeader& h) {
  return {{"header", h.to_json()},
          {"s0", c.s0},
          {"witness", matrix_to_json(c.witness)},
          {"witness_distance", c.witness_distance},
          {"subgroup_sum", c.subgroup_sum},
          {"product", c.product}};
}

inline void write_measure_csv(std::ostream& os, const AtomicMeasure& mu, const OutputHeader& h) {
  os << h.comment() << "\n";
  os << "# s=" << format_sig(mu.s()) << " beta=" << format_sig(mu.h().beta)
     << " atoms=" << mu.atoms().size() << "\n";
  os << "atom_re,atom_im,weight,word_length\n";
  for (const Atom& a : mu.atoms()) {
    os << format_sig(a.location.re(), 17) << ',' << format_sig(a.location.im(), 17) << ','
       << format_sig(a.weight(), 17) << ',' << a.word_length << '\n';
  }
}

inline void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins,
                                const OutputHeader& h) {
  os << h.comment() << "\n";
  os << "bin_lo,bin_hi,mass\n";
  for (const HistogramBin& b : bins) {
    os << format_sig(b.lo) << ',' << format_sig(b.hi) << ',' << format_sig(b.mass, 17) << '\n';
  }
}

/// Binary P6 with the header comment after the magic number.
inline void write_ppm(std::ostream& os, const Raster& img, const OutputHeader& h) {
  os << "P6\n" << h.comment() << "\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

/// One value per line; `log_space` writes ln u_n (with -inf for zeros).
inline void write_sequence_csv(std::ostream& os, const SequenceProbe& u, bool log_space,
                               const OutputHeader& h) {
  os << h.comment() << "\n";
  os << "# log-space: " << (log_space ? "true" : "false") << "\n";
  for (double v : u.logs()) {
    if (log_space) {
      os << (v == kNegInf ? std::string("-inf") : format_sig(v, 17)) << '\n';
    } else {
      os << format_sig(v == kNegInf ? 0.0 : std::exp(v), 17) << '\n';
    }
  }
}

inline SequenceProbe read_sequence_csv(std::istream& is) {
  bool log_space = false;
  std::vector<double> vals;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("log-space: true") != std::string::npos) log_space = true;
      continue;
    }
    if (line == "-inf") {
      vals.push_back(kNegInf);
      continue;
    }
    vals.push_back(parse_number(json(line)));
  }
  return log_space ? SequenceProbe::from_logs(std::move(vals)) : SequenceProbe::from_values(vals);
}

}  // namespace kleinian
