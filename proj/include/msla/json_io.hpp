#pragma once

/// @file json_io.hpp
/// JSON encodings for palettes, light parameters, run traces, attack results,
/// fabrication specs and evaluation records.

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msla/errors.hpp"
#include "msla/fitness.hpp"
#include "msla/ga.hpp"
#include "msla/metrics.hpp"
#include "msla/palette.hpp"
#include "msla/physical.hpp"

namespace msla {

using json = nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("cannot parse " + path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

inline json rgb_to_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

inline Rgb rgb_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("color must be [r,g,b]");
  std::array<std::uint8_t, 3> ch{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number_integer()) throw InvalidArgument("color channels must be integers");
    const auto v = j[i].get<long>();
    if (v < 0 || v > 255) throw InvalidArgument("color channel out of [0,255]");
    ch[i] = static_cast<std::uint8_t>(v);
  }
  return {ch[0], ch[1], ch[2]};
}

// ---------------------------------------------------------------- palette

inline Palette palette_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("palette must be a JSON array");
  std::vector<PaletteEntry> entries;
  try {
    for (const auto& e : j) {
      entries.push_back({e.at("id").get<std::string>(), e.at("name").get<std::string>(),
                         rgb_from_json(e.at("rgb"))});
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed palette entry: ") + e.what());
  }
  return Palette(std::move(entries));
}

inline json palette_to_json(const Palette& p) {
  json out = json::array();
  for (const auto& e : p.entries()) {
    out.push_back({{"id", e.id}, {"name", e.name}, {"rgb", rgb_to_json(e.rgb)}});
  }
  return out;
}

inline Palette load_palette(const std::filesystem::path& path) {
  return palette_from_json(read_json_file(path));
}

// ----------------------------------------------------------- light params

inline json light_params_to_json(const LightParams& p) {
  return {{"x_rel", p.x_rel},
          {"y_rel", p.y_rel},
          {"r", p.radius},
          {"color", rgb_to_json(p.color)},
          {"phi", p.phi}};
}

inline LightParams light_params_from_json(const json& j) {
  LightParams p;
  try {
    p.x_rel = j.at("x_rel").get<double>();
    p.y_rel = j.at("y_rel").get<double>();
    p.radius = j.at("r").get<double>();
    p.color = rgb_from_json(j.at("color"));
    const auto phi = j.at("phi").get<std::vector<double>>();
    if (phi.size() != 3) throw InvalidArgument("phi must hold three angles");
    for (std::size_t i = 0; i < 3; ++i) p.phi[i] = normalize_degrees(phi[i]);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed light parameters: ") + e.what());
  }
  p.validate();
  return p;
}

// ------------------------------------------------------------ run output

inline json generation_record(const GenerationStats& s) {
  return {{"gen", s.generation},
          {"best_fitness", s.best_fitness},
          {"mean_fitness", s.mean_fitness},
          {"best_genes", s.best.genes},
          {"queries_so_far", s.queries_so_far}};
}

inline json attack_result_to_json(const AttackResult& r, const LabelSet& labels,
                                  FitnessVariant variant) {
  json trace = json::array();
  for (const auto& s : r.trace) trace.push_back(generation_record(s));
  json out = {
      {"success", r.success},
      {"ground_truth", r.ground_truth},
      {"ground_truth_label", labels[r.ground_truth]},
      {"adversarial_top1", r.adversarial_top1},
      {"adversarial_top1_label", labels[r.adversarial_top1]},
      {"adversarial_probs", r.prediction.values()},
      {"clean_probs", r.clean_prediction.values()},
      {"fitness_variant", std::string(to_string(variant))},
      {"best_fitness", r.best_fitness},
      {"best_genes", r.best.genes},
      {"params", light_params_to_json(r.params)},
      {"fitness_best_genes", r.fitness_best.genes},
      {"fitness_best_value", r.fitness_best_value},
      {"generations_used", r.generations_used},
      {"queries", r.queries},
      {"trace", trace},
  };
  if (r.palette_index) out["palette_index"] = *r.palette_index;
  return out;
}

/// One JSON object per line: a record per generation, then {"result": ...}.
inline std::string trace_jsonl(const AttackResult& r, const LabelSet& labels,
                               FitnessVariant variant) {
  std::ostringstream out;
  for (const auto& s : r.trace) out << generation_record(s).dump() << '\n';
  out << json{{"result", attack_result_to_json(r, labels, variant)}}.dump() << '\n';
  return out.str();
}

// ---------------------------------------------------------- fabrication

inline json point_to_json(Point p) { return json::array({p.x, p.y}); }

inline Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("point must be [x,y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json fabrication_to_json(const FabricationSpec& s) {
  json out = {
      {"image_width", s.dims.width},
      {"image_height", s.dims.height},
      {"radius_px", s.radius_px},
      {"angles_deg", s.angles_deg},
      {"angle_precision_deg", kAngleStepDeg},
      {"vertices_px", json::array({point_to_json(s.vertices_px[0]), point_to_json(s.vertices_px[1]),
                                   point_to_json(s.vertices_px[2])})},
      {"center_rel", json::array({s.x_rel, s.y_rel})},
      {"center_px", point_to_json(s.center_px)},
      {"sheet", {{"id", s.sheet.id}, {"name", s.sheet.name}, {"rgb", rgb_to_json(s.sheet.rgb)}}},
      {"optimized_rgb", rgb_to_json(s.optimized_rgb)},
      {"alpha", s.alpha},
      {"attack_succeeded", s.attack_succeeded},
  };
  if (s.radius_mm) out["radius_mm"] = *s.radius_mm;
  if (s.px_per_mm) out["px_per_mm"] = *s.px_per_mm;
  if (s.color_warning) out["color_warning"] = *s.color_warning;
  return out;
}

inline FabricationSpec fabrication_from_json(const json& j) {
  FabricationSpec s;
  try {
    s.dims = {j.at("image_height").get<int>(), j.at("image_width").get<int>()};
    s.radius_px = j.at("radius_px").get<double>();
    s.angles_deg = j.at("angles_deg").get<std::array<double, 3>>();
    const auto& verts = j.at("vertices_px");
    if (!verts.is_array() || verts.size() != 3) throw InvalidArgument("need three vertices");
    for (std::size_t i = 0; i < 3; ++i) s.vertices_px[i] = point_from_json(verts[i]);
    const auto rel = j.at("center_rel").get<std::array<double, 2>>();
    s.x_rel = rel[0];
    s.y_rel = rel[1];
    s.center_px = point_from_json(j.at("center_px"));
    const auto& sheet = j.at("sheet");
    s.sheet = {sheet.at("id").get<std::string>(), sheet.at("name").get<std::string>(),
               rgb_from_json(sheet.at("rgb"))};
    s.optimized_rgb = rgb_from_json(j.at("optimized_rgb"));
    s.alpha = j.at("alpha").get<double>();
    s.attack_succeeded = j.at("attack_succeeded").get<bool>();
    if (j.contains("radius_mm")) s.radius_mm = j["radius_mm"].get<double>();
    if (j.contains("px_per_mm")) s.px_per_mm = j["px_per_mm"].get<double>();
    if (j.contains("color_warning")) s.color_warning = j["color_warning"].get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed fabrication spec: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------- evaluation

inline json eval_record_to_json(const EvalRecord& r) {
  return {{"sample_id", r.sample_id},
          {"clean_top1", r.clean_top1},
          {"adversarial_top1", r.adversarial_top1},
          {"ground_truth", r.ground_truth},
          {"clean_p_gt", r.clean_p_gt},
          {"adversarial_p_gt", r.adversarial_p_gt}};
}

inline std::string eval_records_csv(std::span<const EvalRecord> records) {
  std::ostringstream out;
  out.precision(17);
  out << "sample_id,clean_top1,adversarial_top1,ground_truth,clean_p_gt,adversarial_p_gt\n";
  for (const auto& r : records) {
    out << r.sample_id << ',' << r.clean_top1 << ',' << r.adversarial_top1 << ','
        << r.ground_truth << ',' << r.clean_p_gt << ',' << r.adversarial_p_gt << '\n';
  }
  return out.str();
}

}  // namespace msla
