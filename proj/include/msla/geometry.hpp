#pragma once

/// @file geometry.hpp
/// Circle-based triangle construction for the light perturbation.
///
/// A light is described by a circumscribed circle (center given relative to
/// the feasible region, radius in pixels) and three polar angles. Vertices are
/// placed on the circle, so any radius that keeps the circle inside the image
/// also keeps the triangle inside it. Image convention: y grows downward.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "msla/errors.hpp"
#include "msla/image.hpp"

namespace msla {

inline constexpr double kMinRadius = 10.0;

struct LightParams {
  double x_rel = 0.5;
  double y_rel = 0.5;
  double radius = kMinRadius;  // pixels
  Rgb color{};
  std::array<double, 3> phi{};  // degrees

  friend bool operator==(const LightParams&, const LightParams&) = default;

  /// Checks the dimension-independent invariants.
  void validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(x_rel) || !unit(y_rel)) {
      throw InvalidArgument("relative center must lie in [0,1]");
    }
    if (!std::isfinite(radius) || radius <= 0.0) {
      throw InvalidArgument("radius must be positive and finite");
    }
    for (double a : phi) {
      if (!(a >= 0.0 && a < 360.0)) throw InvalidArgument("angles must lie in [0,360)");
    }
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Triangle {
  std::array<Point, 3> v{};

  /// Twice the signed area.
  [[nodiscard]] double signed_area2() const {
    return (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
  }
  [[nodiscard]] double area() const { return 0.5 * std::abs(signed_area2()); }
  [[nodiscard]] double perimeter() const {
    auto d = [](Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); };
    return d(v[0], v[1]) + d(v[1], v[2]) + d(v[2], v[0]);
  }
};

struct RadiusBounds {
  double min = kMinRadius;
  double max = kMinRadius;
};

/// Maps an angle in degrees into [0, 360).
inline double normalize_degrees(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a = 0.0;  // fmod of a tiny negative can round up to 360
  return a;
}

inline RadiusBounds radius_bounds(ImageDims dims, double gamma) {
  dims.require_attackable();
  if (!(gamma > 0.0 && gamma <= 0.5)) {
    throw InvalidArgument("radius scale gamma must lie in (0, 0.5]");
  }
  const double max_r = gamma * dims.min_side();
  if (max_r < kMinRadius) {
    throw DegenerateBounds("gamma * min(H,W) = " + std::to_string(max_r) +
                           " is below the 10 px minimum radius");
  }
  return {kMinRadius, max_r};
}

/// Absolute circle center; the full circle stays inside the image.
inline Point decode_center(const LightParams& p, ImageDims dims) {
  dims.require_attackable();
  if (2.0 * p.radius > dims.min_side()) {
    throw InfeasibleRadius("radius " + std::to_string(p.radius) +
                           " leaves no feasible center for image " + std::to_string(dims.width) +
                           "x" + std::to_string(dims.height));
  }
  const double r = p.radius;
  return {r + p.x_rel * (dims.width - 2.0 * r), r + p.y_rel * (dims.height - 2.0 * r)};
}

/// Vertex on the circle at polar angle phi (degrees).
inline Point vertex_on_circle(Point center, double radius, double phi_deg) {
  const double rad = normalize_degrees(phi_deg) * std::numbers::pi / 180.0;
  return {center.x + radius * std::sin(rad), center.y + radius * std::cos(rad)};
}

/// Vertices in phi order. Coincident angles give a degenerate triangle,
/// which is returned unchanged.
inline Triangle decode_triangle(const LightParams& p, ImageDims dims) {
  const Point c = decode_center(p, dims);
  Triangle t;
  for (std::size_t i = 0; i < 3; ++i) {
    Point v = vertex_on_circle(c, p.radius, p.phi[i]);
    // absorb last-ulp overshoot at the image border
    v.x = std::clamp(v.x, 0.0, static_cast<double>(dims.width));
    v.y = std::clamp(v.y, 0.0, static_cast<double>(dims.height));
    t.v[i] = v;
  }
  return t;
}

}  // namespace msla
