// msla: command-line driver for triangular light attacks.
//
// Exit status: 0 success, 1 configuration/input error, 2 oracle error,
// 3 attack budget exhausted without flipping the prediction.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace msla;
using namespace msla::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitOracle = 2;
constexpr int kExitExhausted = 3;

template <class T>
void flag(CLI::App* app, const std::string& name, std::optional<T>& target,
          const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void add_run_options(CLI::App* app, Overrides& o) {
  flag(app, "--config", o.config, "JSON config file; flags override its values");
  flag(app, "--oracle", o.oracle_kind, "oracle backend: remote | region | constant");
  flag(app, "--oracle-url", o.oracle_url, "model server URL (default: $MSLA_ORACLE_URL)");
  flag(app, "--timeout", o.timeout, "oracle request timeout in seconds");
  flag(app, "--retries", o.retries, "oracle transport retries");
  flag(app, "--labels", o.labels, "label file: one label per line, or a JSON array");
  flag(app, "--fitness", o.fitness, "fitness variant: prob | logprob | multi");
  flag(app, "--alpha", o.alpha, "light transparency in [0,1]");
  flag(app, "--gamma", o.gamma, "radius scale in (0,0.5]");
  flag(app, "--population", o.population, "GA population size");
  flag(app, "--generations", o.generations, "GA generation budget");
  flag(app, "--crossover-rate", o.crossover_rate, "GA crossover rate");
  flag(app, "--mutation-rate", o.mutation_rate, "GA per-gene mutation rate");
  flag(app, "--tournament", o.tournament, "tournament size");
  flag(app, "--elite", o.elite, "elite count");
  flag(app, "--sigma", o.sigma, "mutation std-dev in normalized gene space");
  flag(app, "--seed", o.seed, "RNG seed");
  flag(app, "--crossover-scheme", o.crossover_scheme, "uniform | single-point");
  flag(app, "--mask", o.mask, "grayscale PNG mask (>=128 means modifiable)");
  flag(app, "--palette", o.palette, "palette JSON of physical sheet colors");
  app->add_flag("--physical", o.physical, "restrict colors to the palette");
  flag(app, "--parallel", o.parallel, "concurrent oracle queries inside the GA");
  flag(app, "--out", o.out, "output directory");
}

void ensure_out_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
}

json config_echo(const RunConfig& cfg, ImageDims dims) {
  return {{"alpha", cfg.alpha},
          {"gamma", cfg.gamma},
          {"fitness", std::string(to_string(cfg.variant))},
          {"population_size", cfg.ga.population_size},
          {"max_generations", cfg.ga.max_generations},
          {"crossover_rate", cfg.ga.crossover_rate},
          {"mutation_rate", cfg.ga.mutation_rate},
          {"tournament_size", cfg.ga.tournament_size},
          {"elite_count", cfg.ga.elite_count},
          {"mutation_sigma", cfg.ga.mutation_sigma},
          {"seed", cfg.ga.seed},
          {"physical", cfg.physical},
          {"image_width", dims.width},
          {"image_height", dims.height}};
}

// ------------------------------------------------------------------ attack

int cmd_attack(const std::string& image_path, const std::string& gt_label, const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  const Image img = load_image(image_path);
  const LabelSet labels = make_label_set(require_labels(cfg), gt_label);
  const AttackConfig attack = make_attack_config(cfg, img.dims());
  const auto oracle = make_oracle(cfg.oracle);
  ensure_out_dir(cfg.out);

  std::ofstream trace(cfg.out / "trace.jsonl", std::ios::binary | std::ios::trunc);
  if (!trace) throw ConfigError("cannot write " + (cfg.out / "trace.jsonl").string());
  const AttackResult result =
      run_attack(img, labels, *oracle, cfg.ga, attack, [&trace](const GenerationStats& s) {
        trace << generation_record(s).dump() << '\n';
        trace.flush();
      });

  json res = attack_result_to_json(result, labels, cfg.variant);
  trace << json{{"result", res}}.dump() << '\n';
  res["config"] = config_echo(cfg, img.dims());
  write_text_file(cfg.out / "result.json", res.dump(2) + "\n");
  png::write_rgb(cfg.out / "adversarial.png", result.adversarial);

  std::cout << (result.success ? "attack succeeded" : "attack budget exhausted") << ": '"
            << labels[result.ground_truth] << "' -> '" << labels[result.adversarial_top1]
            << "' after " << result.generations_used << " generations, " << result.queries
            << " queries\n";
  return result.success ? kExitOk : kExitExhausted;
}

// ------------------------------------------------------------------ batch

struct BatchItem {
  std::string file;
  std::string label;
};

struct BatchOutcome {
  std::vector<EvalRecord> attacked;
  std::vector<EvalRecord> evaluated;  // attacked plus clean-misclassified
  std::vector<std::pair<std::string, std::string>> skipped;
  std::uint64_t queries = 0;
  int oracle_failures = 0;
};

std::vector<BatchItem> load_manifest(const fs::path& dir, const std::optional<std::string>& manifest,
                                     const std::vector<std::string>& labels) {
  if (!fs::is_directory(dir)) throw ConfigError("image directory not found: " + dir.string());
  const fs::path mpath = manifest ? fs::path(*manifest) : dir / "manifest.json";
  if (!fs::exists(mpath)) throw ConfigError("ground-truth manifest not found: " + mpath.string());
  json j;
  try {
    j = read_json_file(mpath);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!j.is_object()) throw ConfigError("manifest must map image file names to labels");
  std::vector<BatchItem> items;
  for (const auto& [file, label] : j.items()) {
    if (!label.is_string()) throw ConfigError("manifest label for " + file + " is not a string");
    const auto name = label.get<std::string>();
    if (std::find(labels.begin(), labels.end(), name) == labels.end()) {
      throw ConfigError("manifest label '" + name + "' (for " + file + ") is not in the label set");
    }
    if (!fs::exists(dir / file)) throw ConfigError("manifest names missing image " + file);
    items.push_back({file, name});
  }
  if (items.empty()) throw ConfigError("no images to attack in " + dir.string());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.file < b.file; });
  return items;
}

BatchOutcome run_batch(const fs::path& dir, const std::vector<BatchItem>& items,
                       const std::vector<std::string>& label_list, const ProbabilityOracle& oracle,
                       const RunConfig& cfg, const std::optional<fs::path>& artifacts) {
  BatchOutcome out;
  for (const auto& item : items) {
    const LabelSet labels = LabelSet::with_label(label_list, item.label);
    Image img;
    try {
      img = png::read_rgb(dir / item.file);
    } catch (const ImageIoError& e) {
      std::cerr << "skip " << item.file << ": " << e.what() << '\n';
      out.skipped.emplace_back(item.file, e.what());
      continue;
    }
    try {
      const AttackConfig attack = make_attack_config(cfg, img.dims());
      const AttackResult r = run_attack(img, labels, oracle, cfg.ga, attack);
      EvalRecord rec{item.file,         r.clean_prediction.top1(),
                     r.adversarial_top1, r.ground_truth,
                     r.clean_prediction[r.ground_truth], r.prediction[r.ground_truth]};
      out.attacked.push_back(rec);
      out.evaluated.push_back(rec);
      out.queries += r.queries;
      if (artifacts) {
        const fs::path sub = *artifacts / fs::path(item.file).stem();
        ensure_out_dir(sub);
        png::write_rgb(sub / "adversarial.png", r.adversarial);
        json res = attack_result_to_json(r, labels, cfg.variant);
        res["config"] = config_echo(cfg, img.dims());
        write_text_file(sub / "result.json", res.dump(2) + "\n");
      }
    } catch (const CleanMisclassified& e) {
      std::cerr << "skip " << item.file << ": " << e.what() << '\n';
      out.skipped.emplace_back(item.file, e.what());
      out.evaluated.push_back({item.file, e.predicted(), e.predicted(), labels.ground_truth(),
                               e.p_ground_truth(), e.p_ground_truth()});
    } catch (const OracleError& e) {
      std::cerr << "skip " << item.file << ": oracle failure: " << e.what() << '\n';
      out.skipped.emplace_back(item.file, std::string("oracle failure: ") + e.what());
      ++out.oracle_failures;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      std::cerr << "skip " << item.file << ": " << e.what() << '\n';
      out.skipped.emplace_back(item.file, e.what());
    }
  }
  return out;
}

json batch_metrics(const BatchOutcome& b) {
  json m = {{"attacked", b.attacked.size()}, {"skipped", b.skipped.size()}};
  if (!b.attacked.empty()) {
    m["attack_success_rate"] = attack_success_rate(b.attacked);
    m["mean_queries"] = static_cast<double>(b.queries) / static_cast<double>(b.attacked.size());
  }
  if (!b.evaluated.empty()) {
    m["clean_accuracy"] = top1_accuracy(b.evaluated, Which::Clean);
    m["adversarial_accuracy"] = top1_accuracy(b.evaluated, Which::Adversarial);
    m["accuracy_drop"] = accuracy_drop(b.evaluated);
  }
  return m;
}

int cmd_attack_batch(const std::string& dir, const std::optional<std::string>& manifest,
                     const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  const auto label_list = require_labels(cfg);
  const auto items = load_manifest(dir, manifest, label_list);
  const auto oracle = make_oracle(cfg.oracle);
  ensure_out_dir(cfg.out);

  const BatchOutcome b = run_batch(dir, items, label_list, *oracle, cfg, cfg.out);
  if (b.attacked.empty() && b.oracle_failures > 0) {
    std::cerr << "msla: error: every oracle query failed\n";
    return kExitOracle;
  }

  json records = json::array();
  for (const auto& r : b.attacked) records.push_back(eval_record_to_json(r));
  json skipped = json::array();
  for (const auto& [file, why] : b.skipped) skipped.push_back({{"file", file}, {"reason", why}});
  const json report = {{"records", records}, {"skipped", skipped}, {"metrics", batch_metrics(b)},
                       {"fitness", std::string(to_string(cfg.variant))},
                       {"alpha", cfg.alpha}, {"gamma", cfg.gamma}};
  write_text_file(cfg.out / "report.json", report.dump(2) + "\n");
  write_text_file(cfg.out / "report.csv", eval_records_csv(b.attacked));

  std::cout << "attacked " << b.attacked.size() << ", skipped " << b.skipped.size();
  if (!b.attacked.empty()) std::cout << ", ASR " << attack_success_rate(b.attacked) << "%";
  std::cout << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ sweep

template <class T, class Parse>
std::vector<T> split_list(const std::string& s, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

int cmd_sweep(const std::string& dir, const std::optional<std::string>& manifest,
              const std::string& alphas_s, const std::string& gammas_s,
              const std::string& variants_s, const Overrides& o) {
  const RunConfig base = resolve_config(o);
  auto to_double = [](const std::string& s) {
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw ConfigError("not a number in grid: '" + s + "'");
    }
  };
  const auto alphas = split_list<double>(alphas_s, to_double);
  const auto gammas = split_list<double>(gammas_s, to_double);
  const auto variants = split_list<FitnessVariant>(variants_s, parse_variant);
  if (alphas.empty() || gammas.empty() || variants.empty()) throw ConfigError("sweep grid is empty");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("grid alpha outside [0,1]");
  }
  for (double g : gammas) {
    if (!(g > 0.0 && g <= 0.5)) throw ConfigError("grid gamma outside (0,0.5]");
  }

  const auto label_list = require_labels(base);
  const auto items = load_manifest(dir, manifest, label_list);
  const auto oracle = make_oracle(base.oracle);
  ensure_out_dir(base.out);

  std::ostringstream csv;
  csv.precision(10);
  csv << "alpha,gamma,variant,asr,mean_queries,attacked,skipped\n";
  // (variant, gamma) -> ASR per ascending alpha, for the trend report
  std::map<std::pair<std::string, double>, std::vector<std::pair<double, double>>> by_alpha;
  for (FitnessVariant v : variants) {
    for (double g : gammas) {
      for (double a : alphas) {
        RunConfig cfg = base;
        cfg.alpha = a;
        cfg.gamma = g;
        cfg.variant = v;
        const BatchOutcome b = run_batch(dir, items, label_list, *oracle, cfg, std::nullopt);
        if (b.attacked.empty() && b.oracle_failures > 0) return kExitOracle;
        const double asr = b.attacked.empty() ? NAN : attack_success_rate(b.attacked);
        const double mq = b.attacked.empty()
                              ? NAN
                              : static_cast<double>(b.queries) / static_cast<double>(b.attacked.size());
        csv << a << ',' << g << ',' << to_string(v) << ',' << asr << ',' << mq << ','
            << b.attacked.size() << ',' << b.skipped.size() << '\n';
        by_alpha[{std::string(to_string(v)), g}].emplace_back(a, asr);
      }
    }
  }
  write_text_file(base.out / "sweep.csv", csv.str());

  std::ostringstream trend;
  for (auto& [key, pts] : by_alpha) {
    std::sort(pts.begin(), pts.end());
    bool monotone = true;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].second < pts[i - 1].second) monotone = false;
    }
    trend << "variant=" << key.first << " gamma=" << key.second
          << ": ASR non-decreasing in alpha: " << (monotone ? "yes" : "no") << '\n';
  }
  write_text_file(base.out / "sweep_trend.txt", trend.str());
  std::cout << trend.str();
  return kExitOk;
}

// ------------------------------------------------------------------ frames

int cmd_eval_frames(const std::string& dir, const std::string& gt_label, const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  const LabelSet labels = make_label_set(require_labels(cfg), gt_label);
  const auto frames = list_frames(dir);
  if (frames.empty()) throw NoFrames("no PNG frames in " + dir);
  const auto oracle = make_oracle(cfg.oracle);
  ensure_out_dir(cfg.out);

  const FrameReport rep = frame_level_asr(std::span<const fs::path>(frames), labels, *oracle);
  json rows = json::array();
  for (const auto& f : rep.frames) {
    rows.push_back({{"file", f.file}, {"top1", f.top1}, {"top1_label", labels[f.top1]},
                    {"p_gt", f.p_gt}, {"misclassified", f.top1 != labels.ground_truth()}});
  }
  const json out = {{"ground_truth_label", labels[labels.ground_truth()]},
                    {"frame_order", "lexicographic by file name"},
                    {"frames", rows},
                    {"misclassified", rep.misclassified},
                    {"total", rep.frames.size()},
                    {"frame_level_asr", rep.asr}};
  write_text_file(cfg.out / "frames.json", out.dump(2) + "\n");
  std::cout << "frame-level ASR: " << rep.asr << "% (" << rep.misclassified << "/"
            << rep.frames.size() << ")\n";
  return kExitOk;
}

// ------------------------------------------------------------------ fabricate

int cmd_fabricate(const std::string& result_path, std::optional<double> px_per_mm,
                  const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  if (!cfg.palette_path) throw ConfigError("fabrication needs a palette (--palette)");
  if (!fs::exists(*cfg.palette_path)) {
    throw ConfigError("palette not found: " + cfg.palette_path->string());
  }
  Palette palette = [&] {
    try {
      return load_palette(*cfg.palette_path);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }();
  if (!fs::exists(result_path)) throw ConfigError("result file not found: " + result_path);

  AttackResult result;
  ImageDims dims;
  double alpha = cfg.alpha;
  try {
    const json j = read_json_file(result_path);
    result.params = light_params_from_json(j.at("params"));
    result.success = j.at("success").get<bool>();
    if (j.contains("palette_index")) {
      result.palette_index = j["palette_index"].get<std::size_t>();
      if (*result.palette_index >= palette.size()) {
        throw ConfigError("result palette index exceeds the given palette");
      }
    }
    const auto& c = j.at("config");
    dims = {c.at("image_height").get<int>(), c.at("image_width").get<int>()};
    alpha = c.at("alpha").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError("malformed result file " + result_path + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError("malformed result file " + result_path + ": " + e.what());
  }

  ensure_out_dir(cfg.out);
  const FabricationSpec spec = export_fabrication_spec(result, dims, palette, alpha, px_per_mm);
  write_text_file(cfg.out / "fabrication.json", fabrication_to_json(spec).dump(2) + "\n");
  write_text_file(cfg.out / "fabrication.txt", fabrication_text(spec));
  std::cout << fabrication_text(spec);
  return kExitOk;
}

// ------------------------------------------------------------------ misc

int cmd_oracle_check(const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  const auto oracle = make_oracle(cfg.oracle);
  if (const auto* remote = dynamic_cast<const RemoteOracle*>(oracle.get())) {
    std::cout << "ok: model " << remote->model_id() << " at " << remote->endpoint()
              << ", max_concurrency " << remote->max_concurrency() << '\n';
  } else {
    std::cout << "ok: synthetic " << cfg.oracle.kind << " oracle\n";
  }
  return kExitOk;
}

int cmd_render_preview(const std::string& image_path, const std::string& params_path,
                       const Overrides& o) {
  const RunConfig cfg = resolve_config(o);
  const Image img = load_image(image_path);
  if (!fs::exists(params_path)) throw ConfigError("parameter file not found: " + params_path);
  LightParams p;
  try {
    p = light_params_from_json(read_json_file(params_path));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const AttackConfig attack = make_attack_config(cfg, img.dims());
  const Mask mask = attack.mask ? *attack.mask : Mask(img.dims(), true);
  ensure_out_dir(cfg.out);
  png::write_rgb(cfg.out / "preview.png", apply_light(img, p, cfg.alpha, mask));
  std::cout << "wrote " << (cfg.out / "preview.png").string() << '\n';
  return kExitOk;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const OracleError& e) {
    std::cerr << "msla: oracle error: " << e.what() << '\n';
    return kExitOracle;
  } catch (const std::exception& e) {
    std::cerr << "msla: error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triangular light adversarial attacks against image classifiers"};
  app.require_subcommand(1);
  int status = kExitOk;

  Overrides o;
  std::string image, label, dir, result_path, params_path;
  std::optional<std::string> manifest;
  std::optional<double> px_per_mm;
  std::string alphas = "0.5", gammas = "0.2", variants = "multi";

  auto* attack = app.add_subcommand("attack", "optimize a light against one image");
  attack->add_option("image", image, "input PNG")->required();
  attack->add_option("--label", label, "ground-truth label")->required();
  add_run_options(attack, o);
  attack->callback([&] { status = guarded([&] { return cmd_attack(image, label, o); }); });

  auto* batch = app.add_subcommand("attack-batch", "attack every image listed in a manifest");
  batch->add_option("dir", dir, "image directory")->required();
  flag(batch, "--manifest", manifest, "manifest JSON (default: <dir>/manifest.json)");
  add_run_options(batch, o);
  batch->callback([&] { status = guarded([&] { return cmd_attack_batch(dir, manifest, o); }); });

  auto* sweep = app.add_subcommand("sweep", "batch attacks over an alpha x gamma x fitness grid");
  sweep->add_option("dir", dir, "image directory")->required();
  flag(sweep, "--manifest", manifest, "manifest JSON (default: <dir>/manifest.json)");
  sweep->add_option("--alphas", alphas, "comma-separated alpha values");
  sweep->add_option("--gammas", gammas, "comma-separated gamma values");
  sweep->add_option("--variants", variants, "comma-separated fitness variants");
  add_run_options(sweep, o);
  sweep->callback([&] {
    status = guarded([&] { return cmd_sweep(dir, manifest, alphas, gammas, variants, o); });
  });

  auto* frames = app.add_subcommand("eval-frames", "frame-level ASR over a directory of PNG frames");
  frames->add_option("dir", dir, "frame directory")->required();
  frames->add_option("--label", label, "ground-truth label")->required();
  add_run_options(frames, o);
  frames->callback([&] { status = guarded([&] { return cmd_eval_frames(dir, label, o); }); });

  auto* fab = app.add_subcommand("fabricate", "export a fabrication spec from result.json");
  fab->add_option("result", result_path, "result.json written by attack")->required();
  flag(fab, "--px-per-mm", px_per_mm, "pixels per millimeter at the projection plane");
  add_run_options(fab, o);
  fab->callback([&] { status = guarded([&] { return cmd_fabricate(result_path, px_per_mm, o); }); });

  auto* check = app.add_subcommand("oracle-check", "health-check the configured oracle");
  add_run_options(check, o);
  check->callback([&] { status = guarded([&] { return cmd_oracle_check(o); }); });

  auto* preview = app.add_subcommand("render-preview", "render given light parameters");
  preview->add_option("image", image, "input PNG")->required();
  preview->add_option("--params", params_path, "light parameter JSON")->required();
  add_run_options(preview, o);
  preview->callback([&] {
    status = guarded([&] { return cmd_render_preview(image, params_path, o); });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  return status;
}
