#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ce/linalg.hpp"

namespace ce {

// Grayscale image, row-major, nominal range [0, 1]. Values may leave the
// range during iteration; they are clamped only when written.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), pixels(w * h, fill) {}
  Image(std::size_t w, std::size_t h, const Vector& v);

  double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  Vector as_vector() const { return Vector(pixels); }
};

// Reads P2 or P5 with maxval 255; pixels are divided by 255.
Image read_pgm(const std::filesystem::path& path);
// Writes P5: clamp to [0, 1], then floor(255 x + 0.5).
void write_pgm(const std::filesystem::path& path, const Image& image);
std::vector<unsigned char> quantize(const Image& image);

// 20 log10(1 / RMSE); +infinity for identical images.
double psnr(const Image& x, const Image& ref);

// Piecewise-constant test image: background 0.2, centered disk at 0.8, an
// off-center square at 0.5 and a 2-pixel line at 0.95.
Image phantom(std::size_t width, std::size_t height);

}  // namespace ce
