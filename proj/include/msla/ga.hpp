#pragma once

/// @file ga.hpp
/// Genetic search over light configurations.
///
/// A chromosome holds nine genes in [0,1]:
///
///   x_rel, y_rel, radius, R, G, B, phi1, phi2, phi3
///
/// decode() maps them onto the physical parameter box. In palette (physical)
/// mode the R gene selects a palette entry and the G and B genes are inert.
///
/// run_attack() evaluates generation 0, then evolves with elitism, tournament
/// selection, crossover and Gaussian mutation. It stops at the first evaluated
/// individual the oracle no longer assigns top-1 to the ground truth, or when
/// the generation budget runs out. Elites are carried with their cached score
/// and are not re-queried.
///
/// One seeded mt19937_64 drives every random choice. Evaluation never touches
/// it and results are merged in population order, so the worker count does not
/// change which individual wins.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "msla/errors.hpp"
#include "msla/fitness.hpp"
#include "msla/geometry.hpp"
#include "msla/image.hpp"
#include "msla/oracle.hpp"
#include "msla/palette.hpp"
#include "msla/render.hpp"

namespace msla {

inline constexpr std::size_t kGeneCount = 9;

namespace gene {
inline constexpr std::size_t kXRel = 0;
inline constexpr std::size_t kYRel = 1;
inline constexpr std::size_t kRadius = 2;
inline constexpr std::size_t kRed = 3;
inline constexpr std::size_t kGreen = 4;
inline constexpr std::size_t kBlue = 5;
inline constexpr std::size_t kPhi1 = 6;
inline constexpr std::size_t kPalette = kRed;
}  // namespace gene

struct Chromosome {
  std::array<double, kGeneCount> genes{};

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

using Rng = std::mt19937_64;

enum class CrossoverScheme { Uniform, SinglePoint };

struct GAConfig {
  int population_size = 50;
  int max_generations = 200;
  double crossover_rate = 0.8;
  double mutation_rate = 0.1;
  int tournament_size = 3;
  int elite_count = 1;
  double mutation_sigma = 0.1;
  std::uint64_t seed = 0;
  CrossoverScheme crossover = CrossoverScheme::Uniform;

  void validate() const {
    auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (population_size < 2) throw InvalidArgument("population_size must be at least 2");
    if (max_generations < 0) throw InvalidArgument("max_generations must be non-negative");
    if (!rate(crossover_rate) || !rate(mutation_rate)) {
      throw InvalidArgument("crossover and mutation rates must lie in [0,1]");
    }
    if (tournament_size < 1 || tournament_size > population_size) {
      throw InvalidArgument("tournament_size must lie in [1, population_size]");
    }
    if (elite_count < 0 || elite_count >= population_size) {
      throw InvalidArgument("elite_count must lie in [0, population_size)");
    }
    if (!(mutation_sigma > 0.0)) throw InvalidArgument("mutation_sigma must be positive");
  }
};

struct AttackConfig {
  double alpha = 0.5;
  double gamma = 0.2;
  FitnessVariant variant = FitnessVariant::Multi;
  std::optional<Mask> mask;        // all-ones when absent
  std::optional<Palette> palette;  // enables physical mode
  bool early_stop = true;
  int parallel = 1;  // upper bound on concurrent oracle queries

  void validate(ImageDims dims) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0,1]");
    if (!(gamma > 0.0 && gamma <= 0.5)) throw InvalidArgument("gamma must lie in (0, 0.5]");
    if (mask && mask->dims() != dims) {
      throw DimensionMismatch("mask dimensions differ from image dimensions");
    }
    if (parallel < 1) throw InvalidArgument("parallel must be at least 1");
  }
};

/// Palette entry selected by a chromosome in physical mode.
inline std::size_t palette_index(const Chromosome& c, std::size_t palette_size) {
  const auto idx = static_cast<std::size_t>(std::floor(c.genes[gene::kPalette] * palette_size));
  return std::min(idx, palette_size - 1);
}

inline LightParams decode(const Chromosome& c, ImageDims dims, double gamma,
                          const Palette* palette = nullptr) {
  const RadiusBounds rb = radius_bounds(dims, gamma);
  for (double g : c.genes) {
    if (!(g >= 0.0 && g <= 1.0)) throw InvalidArgument("chromosome genes must lie in [0,1]");
  }
  LightParams p;
  p.x_rel = c.genes[gene::kXRel];
  p.y_rel = c.genes[gene::kYRel];
  p.radius = rb.min + c.genes[gene::kRadius] * (rb.max - rb.min);
  if (palette != nullptr) {
    p.color = (*palette)[palette_index(c, palette->size())].rgb;
  } else {
    auto channel = [](double g) { return static_cast<std::uint8_t>(std::lround(g * 255.0)); };
    p.color = {channel(c.genes[gene::kRed]), channel(c.genes[gene::kGreen]),
               channel(c.genes[gene::kBlue])};
  }
  for (std::size_t i = 0; i < 3; ++i) {
    p.phi[i] = normalize_degrees(c.genes[gene::kPhi1 + i] * 360.0);
  }
  return p;
}

/// Index of the fittest among `k` distinct, uniformly drawn individuals.
/// Equal fitness resolves to the lower population index.
inline std::size_t tournament_select(std::span<const double> fitness, int k, Rng& rng) {
  const auto n = fitness.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw InvalidArgument("tournament size must lie in [1, population size]");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::size_t winner = n;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
    const std::size_t cand = idx[static_cast<std::size_t>(i)];
    if (winner == n || fitness[cand] < fitness[winner] ||
        (fitness[cand] == fitness[winner] && cand < winner)) {
      winner = cand;
    }
  }
  return winner;
}

inline std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                                   double rate, Rng& rng,
                                                   CrossoverScheme scheme = CrossoverScheme::Uniform) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Chromosome x = a;
  Chromosome y = b;
  if (!(u(rng) < rate)) return {x, y};
  if (scheme == CrossoverScheme::Uniform) {
    for (std::size_t i = 0; i < kGeneCount; ++i) {
      if (u(rng) < 0.5) std::swap(x.genes[i], y.genes[i]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> cut(1, kGeneCount - 1);
    for (std::size_t i = cut(rng); i < kGeneCount; ++i) std::swap(x.genes[i], y.genes[i]);
  }
  return {x, y};
}

inline Chromosome mutate(const Chromosome& c, double rate, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw InvalidArgument("mutation sigma must be positive");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma);
  Chromosome out = c;
  for (double& g : out.genes) {
    if (u(rng) < rate) g = std::clamp(g + noise(rng), 0.0, 1.0);
  }
  return out;
}

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  Chromosome best;
  std::uint64_t queries_so_far = 0;
};

struct AttackResult {
  Chromosome best;  // the early-stop individual on success, else the fitness-best
  LightParams params;
  double best_fitness = 0.0;
  ProbDist prediction;  // oracle output on the adversarial image
  std::size_t adversarial_top1 = 0;
  std::size_t ground_truth = 0;
  bool success = false;
  int generations_used = 0;
  std::uint64_t queries = 0;
  std::vector<GenerationStats> trace;
  Chromosome fitness_best;
  double fitness_best_value = 0.0;
  ProbDist clean_prediction;
  std::optional<std::size_t> palette_index;
  Image adversarial;
};

using GenerationObserver = std::function<void(const GenerationStats&)>;

namespace detail {

struct Evaluated {
  Chromosome chrom;
  double fitness = std::numeric_limits<double>::infinity();
  ProbDist dist;
  bool done = false;
};

class Evaluator {
 public:
  Evaluator(const Image& img, const LabelSet& labels, const ProbabilityOracle& oracle,
            const AttackConfig& cfg)
      : img_(img),
        labels_(labels),
        oracle_(oracle),
        cfg_(cfg),
        mask_(cfg.mask ? *cfg.mask : Mask(img.dims(), true)),
        palette_(cfg.palette ? &*cfg.palette : nullptr),
        workers_(std::max(1, std::min(cfg.parallel, oracle.max_concurrency()))) {}

  [[nodiscard]] Image render(const Chromosome& c) const {
    return apply_light(img_, decode(c, img_.dims(), cfg_.gamma, palette_), cfg_.alpha, mask_);
  }

  void evaluate_one(Evaluated& e) const {
    e.dist = oracle_.score(render(e.chrom), labels_);
    e.fitness = evaluate_fitness(e.dist, labels_.ground_truth(), cfg_.variant);
    e.done = true;
  }

  /// Scores pop[from..] in chunks of `workers_`. Returns the index of the
  /// first individual (in population order) whose top-1 left the ground truth
  /// when early stopping is on. Members after it stay unevaluated unless they
  /// shared its chunk.
  std::optional<std::size_t> evaluate(std::vector<Evaluated>& pop, std::size_t from) const {
    for (std::size_t start = from; start < pop.size(); start += workers_) {
      const std::size_t end = std::min(pop.size(), start + workers_);
      if (end - start == 1) {
        evaluate_one(pop[start]);
      } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t i = start; i < end; ++i) {
          jobs.push_back(std::async(std::launch::async, [this, &pop, i] { evaluate_one(pop[i]); }));
        }
        for (auto& j : jobs) j.get();
      }
      if (cfg_.early_stop) {
        for (std::size_t i = start; i < end; ++i) {
          if (pop[i].dist.top1() != labels_.ground_truth()) return i;
        }
      }
    }
    return std::nullopt;
  }

 private:
  const Image& img_;
  const LabelSet& labels_;
  const ProbabilityOracle& oracle_;
  const AttackConfig& cfg_;
  Mask mask_;
  const Palette* palette_;
  std::size_t workers_;
};

inline Chromosome random_chromosome(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Chromosome c;
  for (double& g : c.genes) g = u(rng);
  return c;
}

/// Lowest fitness among evaluated members; ties to the lower index.
inline std::size_t best_index(const std::vector<Evaluated>& pop) {
  std::size_t best = pop.size();
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (!pop[i].done) continue;
    if (best == pop.size() || pop[i].fitness < pop[best].fitness) best = i;
  }
  return best;
}

}  // namespace detail

/// Evolves a light configuration that pushes the oracle's top-1 away from the
/// ground truth. Throws CleanMisclassified if the unperturbed image is already
/// misclassified. Oracle failures propagate; stats for finished generations
/// have already been handed to `observer` by then.
inline AttackResult run_attack(const Image& img, const LabelSet& labels,
                               const ProbabilityOracle& oracle, const GAConfig& cfg,
                               const AttackConfig& attack, const GenerationObserver& observer = {}) {
  cfg.validate();
  attack.validate(img.dims());
  radius_bounds(img.dims(), attack.gamma);

  const std::uint64_t queries_at_start = oracle.query_count();
  const ProbDist clean = oracle.score(img, labels);
  if (clean.top1() != labels.ground_truth()) {
    throw CleanMisclassified("clean image is already classified as '" + labels[clean.top1()] +
                             "' instead of '" + labels[labels.ground_truth()] + "'",
                             clean.top1(), clean[labels.ground_truth()]);
  }

  Rng rng(cfg.seed);
  const auto pop_size = static_cast<std::size_t>(cfg.population_size);
  const detail::Evaluator evaluator(img, labels, oracle, attack);

  std::vector<detail::Evaluated> pop(pop_size);
  for (auto& e : pop) e.chrom = detail::random_chromosome(rng);
  if (attack.palette && attack.palette->size() <= pop_size) {
    // seed generation 0 with every sheet color
    const auto n = attack.palette->size();
    for (std::size_t i = 0; i < n; ++i) {
      pop[i].chrom.genes[gene::kPalette] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    }
  }

  std::optional<std::size_t> hit = evaluator.evaluate(pop, 0);

  AttackResult result;
  result.ground_truth = labels.ground_truth();
  result.clean_prediction = clean;

  const auto elites = static_cast<std::size_t>(cfg.elite_count);
  auto unscored = [](const Chromosome& c) {
    detail::Evaluated e;
    e.chrom = c;
    return e;
  };
  int generation = 0;
  while (!hit && generation < cfg.max_generations) {
    ++generation;

    std::vector<double> fitness(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) fitness[i] = pop[i].fitness;
    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

    std::vector<detail::Evaluated> next;
    next.reserve(pop_size);
    for (std::size_t i = 0; i < elites; ++i) next.push_back(pop[order[i]]);
    while (next.size() < pop_size) {
      const auto& pa = pop[tournament_select(fitness, cfg.tournament_size, rng)].chrom;
      const auto& pb = pop[tournament_select(fitness, cfg.tournament_size, rng)].chrom;
      auto [c1, c2] = crossover(pa, pb, cfg.crossover_rate, rng, cfg.crossover);
      next.push_back(unscored(mutate(c1, cfg.mutation_rate, cfg.mutation_sigma, rng)));
      if (next.size() < pop_size) {
        next.push_back(unscored(mutate(c2, cfg.mutation_rate, cfg.mutation_sigma, rng)));
      }
    }
    pop = std::move(next);
    hit = evaluator.evaluate(pop, elites);

    GenerationStats stats;
    stats.generation = generation;
    const std::size_t b = detail::best_index(pop);
    stats.best_fitness = pop[b].fitness;
    stats.best = pop[b].chrom;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& e : pop) {
      if (e.done) {
        sum += e.fitness;
        ++n;
      }
    }
    stats.mean_fitness = sum / static_cast<double>(n);
    stats.queries_so_far = oracle.query_count() - queries_at_start;
    result.trace.push_back(stats);
    if (observer) observer(stats);
  }

  const std::size_t fb = detail::best_index(pop);
  result.fitness_best = pop[fb].chrom;
  result.fitness_best_value = pop[fb].fitness;

  const detail::Evaluated& chosen = hit ? pop[*hit] : pop[fb];
  result.best = chosen.chrom;
  result.best_fitness = chosen.fitness;
  result.prediction = chosen.dist;
  result.adversarial_top1 = chosen.dist.top1();
  result.success = result.adversarial_top1 != labels.ground_truth();
  result.generations_used = generation;
  result.params = decode(chosen.chrom, img.dims(), attack.gamma,
                         attack.palette ? &*attack.palette : nullptr);
  if (attack.palette) result.palette_index = palette_index(chosen.chrom, attack.palette->size());
  result.adversarial = evaluator.render(chosen.chrom);
  result.queries = oracle.query_count() - queries_at_start;
  return result;
}

}  // namespace msla
