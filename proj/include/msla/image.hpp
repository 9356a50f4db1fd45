#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msla/errors.hpp"

namespace msla {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Image size in pixels. Geometry routines require both sides >= 64; images
/// themselves may be any positive size.
struct ImageDims {
  int height = 0;
  int width = 0;

  static constexpr int kMinSide = 64;

  friend bool operator==(const ImageDims&, const ImageDims&) = default;

  [[nodiscard]] int min_side() const { return height < width ? height : width; }
  [[nodiscard]] std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }

  /// Throws InvalidDimensions unless both sides reach kMinSide.
  void require_attackable() const {
    if (height < kMinSide || width < kMinSide) {
      throw InvalidDimensions("image " + std::to_string(width) + "x" + std::to_string(height) +
                              " is below the 64x64 minimum for light placement");
    }
  }
};

/// Row-major 8-bit RGB image, channels interleaved.
class Image {
 public:
  Image() = default;
  Image(ImageDims dims, Rgb fill = {}) : dims_(dims) {
    if (dims.height <= 0 || dims.width <= 0) {
      throw InvalidDimensions("image dimensions must be positive");
    }
    data_.resize(dims.pixel_count() * 3);
    for (std::size_t i = 0; i < dims.pixel_count(); ++i) {
      data_[3 * i] = fill.r;
      data_[3 * i + 1] = fill.g;
      data_[3 * i + 2] = fill.b;
    }
  }
  Image(ImageDims dims, std::vector<std::uint8_t> interleaved)
      : dims_(dims), data_(std::move(interleaved)) {
    if (dims.height <= 0 || dims.width <= 0) {
      throw InvalidDimensions("image dimensions must be positive");
    }
    if (data_.size() != dims.pixel_count() * 3) {
      throw DimensionMismatch("pixel buffer size does not match image dimensions");
    }
  }

  [[nodiscard]] const ImageDims& dims() const { return dims_; }
  [[nodiscard]] int height() const { return dims_.height; }
  [[nodiscard]] int width() const { return dims_.width; }

  [[nodiscard]] Rgb at(int row, int col) const {
    const std::size_t i = index(row, col);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int row, int col, Rgb c) {
    const std::size_t i = index(row, col);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }

  [[nodiscard]] std::span<const std::uint8_t> bytes() const { return data_; }
  [[nodiscard]] std::span<std::uint8_t> bytes() { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  [[nodiscard]] std::size_t index(int row, int col) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) +
            static_cast<std::size_t>(col)) *
           3;
  }

  ImageDims dims_{};
  std::vector<std::uint8_t> data_;
};

/// Binary modification mask; 1 marks a pixel the light may touch.
class Mask {
 public:
  Mask() = default;
  explicit Mask(ImageDims dims, bool value = true)
      : dims_(dims), bits_(dims.pixel_count(), value ? 1 : 0) {}
  Mask(ImageDims dims, std::vector<std::uint8_t> bits) : dims_(dims), bits_(std::move(bits)) {
    if (bits_.size() != dims.pixel_count()) {
      throw DimensionMismatch("mask size does not match its dimensions");
    }
    for (auto& b : bits_) {
      if (b > 1) throw InvalidArgument("mask values must be 0 or 1");
    }
  }

  [[nodiscard]] const ImageDims& dims() const { return dims_; }
  [[nodiscard]] bool at(int row, int col) const {
    return bits_[static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) +
                 static_cast<std::size_t>(col)] != 0;
  }
  void set(int row, int col, bool v) {
    bits_[static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) +
          static_cast<std::size_t>(col)] = v ? 1 : 0;
  }

 private:
  ImageDims dims_{};
  std::vector<std::uint8_t> bits_;
};

}  // namespace msla
