#pragma once

/// @file png_io.hpp
/// 8-bit RGB PNG images and grayscale PNG masks, via libpng's simplified API.

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "msla/errors.hpp"
#include "msla/image.hpp"

namespace msla::png {

namespace detail {

struct ImageGuard {
  png_image img{};
  ImageGuard() {
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
  }
  ~ImageGuard() { png_image_free(&img); }
  ImageGuard(const ImageGuard&) = delete;
  ImageGuard& operator=(const ImageGuard&) = delete;
};

inline std::vector<std::uint8_t> finish_read(ImageGuard& g, png_uint_32 format,
                                             const std::string& what) {
  g.img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(g.img));
  if (!png_image_finish_read(&g.img, nullptr, buf.data(), 0, nullptr)) {
    throw ImageIoError("cannot decode " + what + ": " + g.img.message);
  }
  return buf;
}

inline std::vector<std::uint8_t> read_pixels(const std::filesystem::path& path,
                                             png_uint_32 format, ImageDims& dims) {
  ImageGuard g;
  if (!png_image_begin_read_from_file(&g.img, path.string().c_str())) {
    throw ImageIoError("cannot read PNG " + path.string() + ": " + g.img.message);
  }
  dims = {static_cast<int>(g.img.height), static_cast<int>(g.img.width)};
  return finish_read(g, format, path.string());
}

}  // namespace detail

inline Image read_rgb(const std::filesystem::path& path) {
  ImageDims dims;
  auto buf = detail::read_pixels(path, PNG_FORMAT_RGB, dims);
  return Image(dims, std::move(buf));
}

inline Image decode_rgb(std::span<const std::uint8_t> bytes) {
  detail::ImageGuard g;
  if (!png_image_begin_read_from_memory(&g.img, bytes.data(), bytes.size())) {
    throw ImageIoError(std::string("cannot decode PNG buffer: ") + g.img.message);
  }
  ImageDims dims{static_cast<int>(g.img.height), static_cast<int>(g.img.width)};
  auto buf = detail::finish_read(g, PNG_FORMAT_RGB, "PNG buffer");
  return Image(dims, std::move(buf));
}

/// Grayscale mask, thresholded at >= 128.
inline Mask read_mask(const std::filesystem::path& path) {
  ImageDims dims;
  auto gray = detail::read_pixels(path, PNG_FORMAT_GRAY, dims);
  for (auto& v : gray) v = v >= 128 ? 1 : 0;
  return Mask(dims, std::move(gray));
}

inline std::vector<std::uint8_t> encode_rgb(const Image& img) {
  detail::ImageGuard g;
  g.img.width = static_cast<png_uint_32>(img.width());
  g.img.height = static_cast<png_uint_32>(img.height());
  g.img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&g.img, nullptr, &size, 0, img.bytes().data(), 0, nullptr)) {
    throw ImageIoError(std::string("cannot size PNG: ") + g.img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&g.img, out.data(), &size, 0, img.bytes().data(), 0, nullptr)) {
    throw ImageIoError(std::string("cannot encode PNG: ") + g.img.message);
  }
  out.resize(size);
  return out;
}

inline void write_rgb(const std::filesystem::path& path, const Image& img) {
  detail::ImageGuard g;
  g.img.width = static_cast<png_uint_32>(img.width());
  g.img.height = static_cast<png_uint_32>(img.height());
  g.img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&g.img, path.string().c_str(), 0, img.bytes().data(), 0,
                               nullptr)) {
    throw ImageIoError("cannot write PNG " + path.string() + ": " + g.img.message);
  }
}

inline void write_mask(const std::filesystem::path& path, const Mask& mask) {
  const ImageDims d = mask.dims();
  std::vector<std::uint8_t> gray(d.pixel_count());
  for (int r = 0; r < d.height; ++r) {
    for (int c = 0; c < d.width; ++c) {
      gray[static_cast<std::size_t>(r) * d.width + c] = mask.at(r, c) ? 255 : 0;
    }
  }
  detail::ImageGuard g;
  g.img.width = static_cast<png_uint_32>(d.width);
  g.img.height = static_cast<png_uint_32>(d.height);
  g.img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&g.img, path.string().c_str(), 0, gray.data(), 0, nullptr)) {
    throw ImageIoError("cannot write PNG " + path.string() + ": " + g.img.message);
  }
}

}  // namespace msla::png
