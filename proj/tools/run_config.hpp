#pragma once

// Run settings for the msla CLI: a JSON config file merged with flag
// overrides. Relative paths in the config file resolve against its directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msla/msla.hpp"

namespace msla::cli {

namespace fs = std::filesystem;

/// Bad configuration or unusable input files; maps to exit status 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct OracleSpec {
  std::string kind = "remote";  // remote | region | constant
  std::string url;
  double timeout = 30.0;
  int retries = 2;
  std::vector<Rgb> anchors;
  Region region;
  double sharpness = 10.0;
  std::vector<double> probs;
};

struct RunConfig {
  OracleSpec oracle;
  std::optional<fs::path> labels_path;
  FitnessVariant variant = FitnessVariant::Multi;
  double alpha = 0.5;
  double gamma = 0.2;
  GAConfig ga;
  std::optional<fs::path> mask_path;
  std::optional<fs::path> palette_path;
  bool physical = false;
  int parallel = 1;
  fs::path out = "msla-out";
};

/// Flag values; unset means "keep the config file's value".
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> oracle_kind;
  std::optional<std::string> oracle_url;
  std::optional<double> timeout;
  std::optional<int> retries;
  std::optional<std::string> labels;
  std::optional<std::string> fitness;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<int> population;
  std::optional<int> generations;
  std::optional<double> crossover_rate;
  std::optional<double> mutation_rate;
  std::optional<int> tournament;
  std::optional<int> elite;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> crossover_scheme;
  std::optional<std::string> mask;
  std::optional<std::string> palette;
  bool physical = false;
  std::optional<int> parallel;
  std::optional<std::string> out;
};

inline FitnessVariant parse_variant(const std::string& s) {
  const auto v = parse_fitness_variant(s);
  if (!v) throw ConfigError("unknown fitness variant '" + s + "' (expected prob|logprob|multi)");
  return *v;
}

inline CrossoverScheme parse_scheme(const std::string& s) {
  if (s == "uniform") return CrossoverScheme::Uniform;
  if (s == "single-point") return CrossoverScheme::SinglePoint;
  throw ConfigError("unknown crossover scheme '" + s + "' (expected uniform|single-point)");
}

inline void apply_config_file(RunConfig& cfg, const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  try {
    if (j.contains("oracle")) {
      const auto& o = j["oracle"];
      auto& spec = cfg.oracle;
      spec.kind = o.value("kind", spec.kind);
      spec.url = o.value("url", spec.url);
      spec.timeout = o.value("timeout", spec.timeout);
      spec.retries = o.value("retries", spec.retries);
      spec.sharpness = o.value("sharpness", spec.sharpness);
      if (o.contains("anchors")) {
        spec.anchors.clear();
        for (const auto& a : o["anchors"]) spec.anchors.push_back(rgb_from_json(a));
      }
      if (o.contains("region")) {
        const auto r = o["region"].get<std::array<int, 4>>();
        spec.region = {r[0], r[1], r[2], r[3]};
      }
      if (o.contains("probs")) spec.probs = o["probs"].get<std::vector<double>>();
    }
    if (j.contains("labels")) cfg.labels_path = resolve(j["labels"].get<std::string>());
    if (j.contains("fitness")) cfg.variant = parse_variant(j["fitness"].get<std::string>());
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.gamma = j.value("gamma", cfg.gamma);
    if (j.contains("ga")) {
      const auto& g = j["ga"];
      cfg.ga.population_size = g.value("population_size", cfg.ga.population_size);
      cfg.ga.max_generations = g.value("max_generations", cfg.ga.max_generations);
      cfg.ga.crossover_rate = g.value("crossover_rate", cfg.ga.crossover_rate);
      cfg.ga.mutation_rate = g.value("mutation_rate", cfg.ga.mutation_rate);
      cfg.ga.tournament_size = g.value("tournament_size", cfg.ga.tournament_size);
      cfg.ga.elite_count = g.value("elite_count", cfg.ga.elite_count);
      cfg.ga.mutation_sigma = g.value("mutation_sigma", cfg.ga.mutation_sigma);
      cfg.ga.seed = g.value("seed", cfg.ga.seed);
      if (g.contains("crossover")) cfg.ga.crossover = parse_scheme(g["crossover"].get<std::string>());
    }
    if (j.contains("mask")) cfg.mask_path = resolve(j["mask"].get<std::string>());
    if (j.contains("palette")) cfg.palette_path = resolve(j["palette"].get<std::string>());
    cfg.physical = j.value("physical", cfg.physical);
    cfg.parallel = j.value("parallel", cfg.parallel);
    if (j.contains("out")) cfg.out = resolve(j["out"].get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError("invalid config " + path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError("invalid config " + path.string() + ": " + e.what());
  }
}

inline RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg;
  if (const char* env = std::getenv("MSLA_ORACLE_URL")) cfg.oracle.url = env;
  if (o.config) apply_config_file(cfg, *o.config);

  if (o.oracle_kind) cfg.oracle.kind = *o.oracle_kind;
  if (o.oracle_url) cfg.oracle.url = *o.oracle_url;
  if (o.timeout) cfg.oracle.timeout = *o.timeout;
  if (o.retries) cfg.oracle.retries = *o.retries;
  if (o.labels) cfg.labels_path = *o.labels;
  if (o.fitness) cfg.variant = parse_variant(*o.fitness);
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.population) cfg.ga.population_size = *o.population;
  if (o.generations) cfg.ga.max_generations = *o.generations;
  if (o.crossover_rate) cfg.ga.crossover_rate = *o.crossover_rate;
  if (o.mutation_rate) cfg.ga.mutation_rate = *o.mutation_rate;
  if (o.tournament) cfg.ga.tournament_size = *o.tournament;
  if (o.elite) cfg.ga.elite_count = *o.elite;
  if (o.sigma) cfg.ga.mutation_sigma = *o.sigma;
  if (o.seed) cfg.ga.seed = *o.seed;
  if (o.crossover_scheme) cfg.ga.crossover = parse_scheme(*o.crossover_scheme);
  if (o.mask) cfg.mask_path = *o.mask;
  if (o.palette) cfg.palette_path = *o.palette;
  if (o.physical) cfg.physical = true;
  if (o.parallel) cfg.parallel = *o.parallel;
  if (o.out) cfg.out = *o.out;

  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 0.5)) throw ConfigError("gamma must lie in (0, 0.5]");
  if (cfg.parallel < 1) throw ConfigError("--parallel must be at least 1");
  if (cfg.physical && !cfg.palette_path) throw ConfigError("--physical requires --palette");
  try {
    cfg.ga.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

/// One label per line (blank lines ignored), or a JSON array for *.json.
inline std::vector<std::string> load_labels(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("label file not found: " + path.string());
  std::vector<std::string> labels;
  if (path.extension() == ".json") {
    try {
      labels = read_json_file(path).get<std::vector<std::string>>();
    } catch (const std::exception& e) {
      throw ConfigError("invalid label file " + path.string() + ": " + e.what());
    }
  } else {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      labels.push_back(line.substr(first, last - first + 1));
    }
  }
  if (labels.size() < 2) throw ConfigError("label file " + path.string() + " needs at least two labels");
  return labels;
}

inline std::vector<std::string> require_labels(const RunConfig& cfg) {
  if (!cfg.labels_path) throw ConfigError("no label file given (--labels)");
  return load_labels(*cfg.labels_path);
}

inline LabelSet make_label_set(std::vector<std::string> labels, const std::string& gt) {
  try {
    return LabelSet::with_label(std::move(labels), gt);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

inline Image load_image(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("image not found: " + path.string());
  try {
    return png::read_rgb(path);
  } catch (const ImageIoError& e) {
    throw ConfigError(e.what());
  }
}

inline std::unique_ptr<ProbabilityOracle> make_oracle(const OracleSpec& spec) {
  if (spec.kind == "remote") {
    if (spec.url.empty()) {
      throw ConfigError("no oracle endpoint (use --oracle-url or MSLA_ORACLE_URL)");
    }
    return std::make_unique<RemoteOracle>(spec.url, spec.timeout, spec.retries);
  }
  try {
    if (spec.kind == "region") {
      return std::make_unique<RegionColorOracle>(spec.anchors, spec.region, spec.sharpness);
    }
    if (spec.kind == "constant") {
      return std::make_unique<ConstantOracle>(ProbDist(spec.probs));
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid oracle settings: ") + e.what());
  } catch (const InvalidDistribution& e) {
    throw ConfigError(std::string("invalid constant oracle distribution: ") + e.what());
  }
  throw ConfigError("unknown oracle kind '" + spec.kind + "' (expected remote|region|constant)");
}

inline AttackConfig make_attack_config(const RunConfig& cfg, ImageDims dims) {
  AttackConfig a;
  a.alpha = cfg.alpha;
  a.gamma = cfg.gamma;
  a.variant = cfg.variant;
  a.parallel = cfg.parallel;
  try {
    if (cfg.mask_path) {
      if (!fs::exists(*cfg.mask_path)) throw ConfigError("mask not found: " + cfg.mask_path->string());
      a.mask = png::read_mask(*cfg.mask_path);
      if (a.mask->dims() != dims) throw ConfigError("mask dimensions differ from the image");
    }
    if (cfg.physical) {
      if (!fs::exists(*cfg.palette_path)) {
        throw ConfigError("palette not found: " + cfg.palette_path->string());
      }
      a.palette = load_palette(*cfg.palette_path);
    }
  } catch (const ImageIoError& e) {
    throw ConfigError(e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return a;
}

}  // namespace msla::cli
