#pragma once

/// @file physical.hpp
/// Turns an optimized light into a recipe an operator can build: a circle
/// radius, three protractor angles, the cutout vertices and the sheet to use.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "msla/ga.hpp"
#include "msla/geometry.hpp"
#include "msla/image.hpp"
#include "msla/palette.hpp"
#include "msla/render.hpp"

namespace msla {

/// Protractor resolution, degrees.
inline constexpr double kAngleStepDeg = 0.5;

struct FabricationSpec {
  ImageDims dims;
  double radius_px = 0.0;
  std::optional<double> radius_mm;
  std::optional<double> px_per_mm;
  std::array<double, 3> angles_deg{};  // rounded, ascending
  std::array<Point, 3> vertices_px{};  // from the rounded angles
  double x_rel = 0.0;
  double y_rel = 0.0;
  Point center_px;
  PaletteEntry sheet;
  Rgb optimized_rgb{};
  std::optional<std::string> color_warning;
  double alpha = 0.0;
  bool attack_succeeded = false;
};

inline double round_to_protractor(double deg) {
  return normalize_degrees(std::round(normalize_degrees(deg) / kAngleStepDeg) * kAngleStepDeg);
}

inline FabricationSpec export_fabrication_spec(const AttackResult& result, ImageDims dims,
                                               const Palette& palette, double alpha,
                                               std::optional<double> px_per_mm = std::nullopt) {
  if (px_per_mm && !(*px_per_mm > 0.0)) throw InvalidArgument("px_per_mm must be positive");
  const LightParams& p = result.params;
  FabricationSpec spec;
  spec.dims = dims;
  spec.radius_px = p.radius;
  spec.px_per_mm = px_per_mm;
  if (px_per_mm) spec.radius_mm = p.radius / *px_per_mm;
  spec.x_rel = p.x_rel;
  spec.y_rel = p.y_rel;
  spec.center_px = decode_center(p, dims);
  spec.alpha = alpha;
  spec.attack_succeeded = result.success;
  spec.optimized_rgb = p.color;

  if (result.palette_index) {
    spec.sheet = palette[*result.palette_index];
  } else {
    spec.sheet = nearest_palette_color(p.color, palette);
    if (spec.sheet.rgb != p.color) {
      spec.color_warning =
          "optimized color differs from the nearest physical sheet; the deployed light will "
          "not match the digital attack exactly";
    }
  }

  for (std::size_t i = 0; i < 3; ++i) spec.angles_deg[i] = round_to_protractor(p.phi[i]);
  std::sort(spec.angles_deg.begin(), spec.angles_deg.end());
  for (std::size_t i = 0; i < 3; ++i) {
    spec.vertices_px[i] = vertex_on_circle(spec.center_px, spec.radius_px, spec.angles_deg[i]);
  }
  return spec;
}

/// Renders the light exactly as the spec describes it.
inline Image render_fabrication(const Image& img, const FabricationSpec& spec, const Mask& mask) {
  Triangle tri{spec.vertices_px};
  for (auto& v : tri.v) {
    v.x = std::clamp(v.x, 0.0, static_cast<double>(img.width()));
    v.y = std::clamp(v.y, 0.0, static_cast<double>(img.height()));
  }
  return apply_triangle(img, tri, spec.sheet.rgb, spec.alpha, mask);
}

inline Image render_fabrication(const Image& img, const FabricationSpec& spec) {
  return render_fabrication(img, spec, Mask(img.dims(), true));
}

/// Operator-facing summary.
inline std::string fabrication_text(const FabricationSpec& s) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(1);
  out << "Triangular light fabrication sheet\n"
      << "==================================\n"
      << "Image size:        " << s.dims.width << " x " << s.dims.height << " px\n"
      << "Circle radius:     " << s.radius_px << " px";
  if (s.radius_mm) out << " (" << *s.radius_mm << " mm)";
  out << "\n"
      << "Circle center:     (" << s.center_px.x << ", " << s.center_px.y << ") px\n";
  out.precision(4);
  out << "Relative center:   (" << s.x_rel << ", " << s.y_rel << ")\n";
  out.precision(1);
  out << "Protractor angles: " << s.angles_deg[0] << ", " << s.angles_deg[1] << ", "
      << s.angles_deg[2] << " deg (measured from the downward vertical, 0.5 deg steps)\n";
  for (std::size_t i = 0; i < 3; ++i) {
    out << "Vertex " << i + 1 << ":          (" << s.vertices_px[i].x << ", " << s.vertices_px[i].y
        << ") px\n";
  }
  out << "Sheet:             " << s.sheet.name << " [" << s.sheet.id << "] rgb("
      << int{s.sheet.rgb.r} << ", " << int{s.sheet.rgb.g} << ", " << int{s.sheet.rgb.b} << ")\n";
  out.precision(2);
  out << "Transparency:      alpha = " << s.alpha << "\n"
      << "Digital attack:    " << (s.attack_succeeded ? "succeeded" : "did not succeed") << "\n";
  if (s.color_warning) out << "WARNING: " << *s.color_warning << "\n";
  return out.str();
}

}  // namespace msla
