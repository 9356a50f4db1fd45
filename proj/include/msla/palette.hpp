#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "msla/errors.hpp"
#include "msla/image.hpp"

namespace msla {

/// A transparent sheet color as measured under the target camera.
struct PaletteEntry {
  std::string id;
  std::string name;
  Rgb rgb{};

  friend bool operator==(const PaletteEntry&, const PaletteEntry&) = default;
};

class Palette {
 public:
  explicit Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw InvalidArgument("palette must not be empty");
    std::set<std::string> ids;
    for (const auto& e : entries_) {
      if (!ids.insert(e.id).second) throw InvalidArgument("duplicate palette id '" + e.id + "'");
    }
  }

  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const PaletteEntry& operator[](std::size_t i) const { return entries_.at(i); }
  [[nodiscard]] const std::vector<PaletteEntry>& entries() const { return entries_; }

 private:
  std::vector<PaletteEntry> entries_;
};

/// Index of the entry closest to `rgb` in Euclidean RGB distance; ties go to
/// the earlier entry.
inline std::size_t nearest_palette_index(Rgb rgb, const Palette& palette) {
  std::size_t best = 0;
  long best_d2 = -1;
  for (std::size_t i = 0; i < palette.size(); ++i) {
    const Rgb c = palette[i].rgb;
    const long dr = static_cast<long>(rgb.r) - c.r;
    const long dg = static_cast<long>(rgb.g) - c.g;
    const long db = static_cast<long>(rgb.b) - c.b;
    const long d2 = dr * dr + dg * dg + db * db;
    if (best_d2 < 0 || d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

inline const PaletteEntry& nearest_palette_color(Rgb rgb, const Palette& palette) {
  return palette[nearest_palette_index(rgb, palette)];
}

}  // namespace msla
