#pragma once

/// @file render.hpp
/// Masked alpha compositing of a flat-colored triangle onto an image.
///
/// Rasterization samples pixel centers (col + 0.5, row + 0.5) with an
/// inclusive boundary and no anti-aliasing. Blended channels are rounded
/// half-up, which makes every render bit-exact.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "msla/errors.hpp"
#include "msla/geometry.hpp"
#include "msla/image.hpp"

namespace msla {

namespace detail {

inline double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(Point p, Point a, Point b) {
  if (cross(a, b, p) != 0.0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

inline std::uint8_t blend_channel(std::uint8_t in, std::uint8_t fill, double alpha) {
  const double v = (1.0 - alpha) * in + alpha * fill;
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace detail

/// Inclusive containment test. Edge signs make the result independent of
/// vertex order. A zero-area triangle contains only points on its segments.
inline bool point_in_triangle(Point p, const Triangle& t) {
  const auto& [a, b, c] = t.v;
  if (t.signed_area2() == 0.0) {
    return detail::on_segment(p, a, b) || detail::on_segment(p, b, c) ||
           detail::on_segment(p, c, a);
  }
  const double d1 = detail::cross(a, b, p);
  const double d2 = detail::cross(b, c, p);
  const double d3 = detail::cross(c, a, p);
  const bool has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
  const bool has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
  return !(has_neg && has_pos);
}

/// Composites `color` over every masked pixel whose center lies in `tri`.
inline Image apply_triangle(const Image& img, const Triangle& tri, Rgb color, double alpha,
                            const Mask& mask) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0,1]");
  }
  if (mask.dims() != img.dims()) {
    throw DimensionMismatch("mask dimensions differ from image dimensions");
  }
  Image out = img;
  if (alpha == 0.0) return out;

  const auto [x_lo, x_hi] = std::minmax({tri.v[0].x, tri.v[1].x, tri.v[2].x});
  const auto [y_lo, y_hi] = std::minmax({tri.v[0].y, tri.v[1].y, tri.v[2].y});
  // pixel centers inside the bounding box
  const int col0 = std::max(0, static_cast<int>(std::ceil(x_lo - 0.5)));
  const int col1 = std::min(img.width() - 1, static_cast<int>(std::floor(x_hi - 0.5)));
  const int row0 = std::max(0, static_cast<int>(std::ceil(y_lo - 0.5)));
  const int row1 = std::min(img.height() - 1, static_cast<int>(std::floor(y_hi - 0.5)));

  for (int row = row0; row <= row1; ++row) {
    for (int col = col0; col <= col1; ++col) {
      if (!mask.at(row, col)) continue;
      if (!point_in_triangle({col + 0.5, row + 0.5}, tri)) continue;
      const Rgb in = img.at(row, col);
      out.set(row, col,
              {detail::blend_channel(in.r, color.r, alpha),
               detail::blend_channel(in.g, color.g, alpha),
               detail::blend_channel(in.b, color.b, alpha)});
    }
  }
  return out;
}

inline Image apply_triangle(const Image& img, const Triangle& tri, Rgb color, double alpha) {
  return apply_triangle(img, tri, color, alpha, Mask(img.dims(), true));
}

/// The light application function: decode `p` against the image and
/// composite it through `mask`.
inline Image apply_light(const Image& img, const LightParams& p, double alpha, const Mask& mask) {
  if (mask.dims() != img.dims()) {
    throw DimensionMismatch("mask dimensions differ from image dimensions");
  }
  p.validate();
  return apply_triangle(img, decode_triangle(p, img.dims()), p.color, alpha, mask);
}

inline Image apply_light(const Image& img, const LightParams& p, double alpha) {
  return apply_light(img, p, alpha, Mask(img.dims(), true));
}

}  // namespace msla
