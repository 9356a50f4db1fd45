// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Every check runs against the synthetic region-color oracle; no network.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "msla/msla.hpp"
#include "support/scenario.hpp"

namespace fs = std::filesystem;
using namespace msla;

namespace {

constexpr int kSeeds = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

AttackResult scenario_attack(std::uint64_t seed, const AttackConfig& attack) {
  const auto oracle = testing::scenario_oracle();
  GAConfig cfg;
  cfg.seed = seed;
  return run_attack(testing::scenario_image(), testing::scenario_label_set(), oracle, cfg, attack);
}

double scenario_asr(const AttackConfig& attack) {
  int ok = 0;
  for (int s = 1; s <= kSeeds; ++s) ok += scenario_attack(s, attack).success;
  return 100.0 * ok / kSeeds;
}

std::string fmt(double v, int prec = 1) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(prec);
  o << v;
  return o.str();
}

// ------------------------------------------------------------ criteria

Outcome constructed_success() {
  int ok = 0, max_gen = 0;
  for (int s = 1; s <= kSeeds; ++s) {
    const AttackResult r = scenario_attack(s, {});
    if (r.success && r.generations_used <= 200) ++ok;
    max_gen = std::max(max_gen, r.generations_used);
  }
  return {ok >= 18, std::to_string(ok) + "/20 seeds flipped (need >= 18), max generations used " +
                        std::to_string(max_gen)};
}

Outcome random_search_dominance() {
  const Image img = testing::scenario_image();
  const LabelSet labels = testing::scenario_label_set();
  int wins = 0;
  double worst_margin = -1e300;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto ga_oracle = testing::scenario_oracle();
    AttackConfig attack;
    attack.early_stop = false;  // run the full budget so both sides spend the same queries
    GAConfig cfg;
    cfg.seed = s;
    const AttackResult r = run_attack(img, labels, ga_oracle, cfg, attack);

    const auto rs_oracle = testing::scenario_oracle();
    const detail::Evaluator eval(img, labels, rs_oracle, attack);
    Rng rng(1000 + s);
    std::vector<detail::Evaluated> pool(10000);
    for (auto& e : pool) e.chrom = detail::random_chromosome(rng);
    eval.evaluate(pool, 0);
    const double rs_best = pool[detail::best_index(pool)].fitness;
    if (r.fitness_best_value <= rs_best) ++wins;
    worst_margin = std::max(worst_margin, r.fitness_best_value - rs_best);
  }
  return {wins >= 19, std::to_string(wins) + "/20 trials GA best <= random-search best (need >= 19)"
                          ", worst GA-minus-random margin " + fmt(worst_margin, 3)};
}

Outcome variant_ordering() {
  AttackConfig a;
  a.variant = FitnessVariant::Multi;
  const double multi = scenario_asr(a);
  a.variant = FitnessVariant::LogProb;
  const double logprob = scenario_asr(a);
  a.variant = FitnessVariant::Prob;
  const double prob = scenario_asr(a);
  return {multi >= logprob && logprob >= prob - 5.0,
          "ASR multi " + fmt(multi) + "%, logprob " + fmt(logprob) + "%, prob " + fmt(prob) + "%"};
}

Outcome alpha_gamma_trend() {
  AttackConfig strong;
  strong.variant = FitnessVariant::Prob;
  AttackConfig weak = strong;
  weak.alpha = 0.1;
  weak.gamma = 0.1;
  const double hi = scenario_asr(strong), lo = scenario_asr(weak);
  return {hi > lo, "ASR(alpha=0.5, gamma=0.2) " + fmt(hi) + "% vs ASR(alpha=0.1, gamma=0.1) " +
                       fmt(lo) + "%"};
}

Outcome numerical_invariants() {
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

  // softmax and entropy
  {
    const std::vector<double> eq(4, 2.0), gap{1000.0, 0.0}, ln2{std::log(2.0), 0.0};
    const ProbDist u = softmax(eq), g = softmax(gap), l = softmax(ln2);
    expect(near(u[0], 0.25, 1e-9) && near(u[3], 0.25, 1e-9), "softmax uniform");
    expect(near(g[0], 1.0, 1e-9) && near(g[1], 0.0, 1e-9), "softmax saturation");
    expect(near(l[0], 2.0 / 3.0, 1e-9) && near(l[1], 1.0 / 3.0, 1e-9), "softmax ln2");
    expect(near(shannon_entropy(ProbDist::uniform(80)), std::log(80.0), 1e-9), "entropy uniform");
    expect(near(shannon_entropy(ProbDist::one_hot(80, 3)), 0.0, 1e-9), "entropy one-hot");
  }
  // fitness
  {
    expect(near(evaluate_fitness(ProbDist::one_hot(10, 0), 0, FitnessVariant::Multi),
                4.5398899216870535e-05, 1e-6),
           "multi one-hot");
    expect(near(evaluate_fitness(ProbDist::uniform(80), 0, FitnessVariant::Multi), -8.7604278547,
                1e-6),
           "multi uniform K=80");
    expect(near(evaluate_fitness(ProbDist({0.0, 1.0}), 0, FitnessVariant::LogProb), -10.0, 1e-6),
           "logprob zero mass");
    expect(near(evaluate_fitness(ProbDist({0.3, 0.7}), 0, FitnessVariant::Prob), 0.3, 1e-6),
           "prob");
  }
  // rendering
  {
    const ImageDims dims{224, 224};
    Image img(dims);
    Rng rng(42);
    std::uniform_int_distribution<int> ch(0, 255);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(ch(rng));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const LightParams p = decode(detail::random_chromosome(rng), dims, 0.3);
      expect(apply_light(img, p, 0.0) == img, "alpha=0 identity");
      expect(apply_light(img, p, 0.8, Mask(dims, false)) == img, "zero mask identity");
      const Image full = apply_light(img, p, 1.0);
      const Triangle tri = decode_triangle(p, dims);
      long inside = 0;
      bool fill_ok = true;
      for (int r = 0; r < 224; ++r) {
        for (int c = 0; c < 224; ++c) {
          if (point_in_triangle({c + 0.5, r + 0.5}, tri)) {
            ++inside;
            fill_ok = fill_ok && full.at(r, c) == p.color;
          } else {
            fill_ok = fill_ok && full.at(r, c) == img.at(r, c);
          }
        }
      }
      expect(fill_ok, "alpha=1 interior fill");
      expect(std::abs(inside - tri.area()) <= 3.0 * tri.perimeter(), "raster area bound");
    }
  }
  // vertex geometry
  {
    Rng rng(7);
    for (int t = 0; t < 2000; ++t) {
      const ImageDims dims{64 + static_cast<int>(rng() % 400), 64 + static_cast<int>(rng() % 400)};
      // smallest gamma that still admits the 10 px minimum radius
      const double gmin = std::max(0.05, kMinRadius / dims.min_side());
      const double gamma = gmin + (0.5 - gmin) * std::uniform_real_distribution<double>(0, 1)(rng);
      LightParams p = decode(detail::random_chromosome(rng), dims, gamma);
      const Point c = decode_center(p, dims);
      const Triangle a = decode_triangle(p, dims);
      for (const Point& v : a.v) {
        expect(near(std::hypot(v.x - c.x, v.y - c.y), p.radius, 1e-9), "vertex on circle");
      }
      for (double& phi : p.phi) phi += 360.0;
      const Triangle b = decode_triangle(p, dims);
      for (int k = 0; k < 3; ++k) {
        expect(near(a.v[k].x, b.v[k].x, 1e-9) && near(a.v[k].y, b.v[k].y, 1e-9),
               "angle periodicity");
      }
    }
  }
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  std::string detail = bad.empty() ? "all closed-form and invariant checks hold" : "failed:";
  for (const auto& b : bad) detail += " [" + b + "]";
  return {bad.empty(), detail};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MSLA_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_reproducibility() {
  const fs::path root = fs::path(MSLA_TEST_TMP) / "repro";
  fs::remove_all(root);
  fs::create_directories(root);
  png::write_rgb(root / "scene.png", testing::scenario_image());
  {
    std::ofstream labels(root / "labels.txt");
    for (const auto& l : testing::scenario_labels()) labels << l << '\n';
  }
  json anchors = json::array();
  for (const Rgb& a : testing::scenario_anchors()) anchors.push_back(rgb_to_json(a));
  const Region reg = testing::scenario_region();
  const json cfg = {{"oracle",
                     {{"kind", "region"},
                      {"anchors", anchors},
                      {"region", {reg.x, reg.y, reg.width, reg.height}},
                      {"sharpness", testing::kSharpness}}},
                    {"labels", "labels.txt"},
                    {"ga", {{"seed", 31337}}}};
  std::ofstream(root / "config.json") << cfg.dump(2);

  std::vector<std::string> problems;
  std::string png_p1;
  for (int parallel : {1, 4}) {
    std::string first[3];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = root / ("p" + std::to_string(parallel) + "_run" + std::to_string(run));
      const int rc = run_cli("attack \"" + (root / "scene.png").string() +
                             "\" --label gray --config \"" + (root / "config.json").string() +
                             "\" --parallel " + std::to_string(parallel) + " --out \"" +
                             out.string() + "\"");
      if (rc != 0 && rc != 3) {
        problems.push_back("exit " + std::to_string(rc));
        continue;
      }
      const std::string files[3] = {slurp(out / "adversarial.png"), slurp(out / "trace.jsonl"),
                                    slurp(out / "result.json")};
      const char* names[3] = {"adversarial.png", "trace.jsonl", "result.json"};
      for (int i = 0; i < 3; ++i) {
        if (files[i].empty()) problems.push_back(std::string(names[i]) + " missing");
        if (run == 0) {
          first[i] = files[i];
        } else if (files[i] != first[i]) {
          problems.push_back(std::string(names[i]) + " differs at parallel " +
                             std::to_string(parallel));
        }
      }
      if (parallel == 1 && run == 0) png_p1 = files[0];
      if (parallel == 4 && run == 0 && files[0] != png_p1) {
        problems.push_back("parallel 4 chose a different light than parallel 1");
      }
    }
  }
  std::string detail = problems.empty()
                           ? "adversarial.png, trace.jsonl, result.json byte-identical across "
                             "repeat runs at --parallel 1 and --parallel 4"
                           : "";
  for (const auto& p : problems) detail += "[" + p + "] ";
  return {problems.empty(), detail};
}

Outcome fabrication_round_trip() {
  // 20 successes cannot resolve a 90% threshold to better than about +-7 points,
  // so this check uses a larger seed set; the first-20 figure is printed too.
  constexpr int kFabSeeds = 100;
  const Image img = testing::scenario_image();
  const LabelSet labels = testing::scenario_label_set();
  const Palette palette = testing::scenario_palette();
  AttackConfig attack;
  attack.palette = palette;
  int successes = 0, survived = 0, successes20 = 0, survived20 = 0;
  for (int s = 1; s <= kFabSeeds; ++s) {
    const auto oracle = testing::scenario_oracle();
    GAConfig cfg;
    cfg.seed = s;
    const AttackResult r = run_attack(img, labels, oracle, cfg, attack);
    if (!r.success) continue;
    const FabricationSpec spec = export_fabrication_spec(r, img.dims(), palette, attack.alpha);
    const FabricationSpec reread = fabrication_from_json(json::parse(fabrication_to_json(spec).dump()));
    const ProbDist d = oracle.score(render_fabrication(img, reread), labels);
    const bool flipped = d.top1() != labels.ground_truth();
    ++successes;
    survived += flipped;
    if (s <= kSeeds) {
      ++successes20;
      survived20 += flipped;
    }
  }
  if (successes == 0) return {false, "no successful physical-mode attacks to fabricate"};
  const double rate = 100.0 * survived / successes;
  return {rate >= 90.0, std::to_string(survived) + "/" + std::to_string(successes) +
                            " fabricated lights still flip top-1 over " + std::to_string(kFabSeeds) +
                            " seeds (" + fmt(rate) + "%, need >= 90%); seeds 1-20 alone: " +
                            std::to_string(survived20) + "/" + std::to_string(successes20)};
}

}  // namespace

int main() {
  report("constructed-oracle attack success", constructed_success);
  report("random-search dominance", random_search_dominance);
  report("fitness-variant ordering", variant_ordering);
  report("alpha/gamma trend", alpha_gamma_trend);
  report("numerical invariant suite", numerical_invariants);
  report("CLI reproducibility", cli_reproducibility);
  report("fabrication round-trip", fabrication_round_trip);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
