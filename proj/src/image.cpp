#include "ce/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "ce/error.hpp"

namespace ce {

Image::Image(std::size_t w, std::size_t h, const Vector& v) : width(w), height(h), pixels(v.values()) {
  require(pixels.size() == w * h, ErrorCode::DimensionMismatch, "image size vs pixel count");
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

std::size_t header_number(std::istream& in, const char* what) {
  const std::string token = header_token(in);
  require(!token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }),
          ErrorCode::BadImage, std::string("malformed PGM ") + what);
  return std::stoul(token);
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  const std::string magic = header_token(in);
  require(magic == "P2" || magic == "P5", ErrorCode::BadImage, "not a P2/P5 file: " + path.string());
  const std::size_t width = header_number(in, "width");
  const std::size_t height = header_number(in, "height");
  const std::size_t maxval = header_number(in, "maxval");
  require(width > 0 && height > 0, ErrorCode::BadImage, "empty image");
  require(maxval == 255, ErrorCode::BadImage, "only maxval 255 is supported");

  Image img(width, height);
  if (magic == "P5") {
    std::vector<unsigned char> bytes(width * height);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<std::size_t>(in.gcount()) == bytes.size(), ErrorCode::BadImage, "truncated pixel data");
    for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = bytes[i] / 255.0;
  } else {
    for (double& px : img.pixels) {
      const std::string token = header_token(in);
      require(!token.empty(), ErrorCode::BadImage, "truncated pixel data");
      std::size_t value = 0;
      try {
        value = std::stoul(token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadImage, "bad pixel value '" + token + "'");
      }
      require(value <= 255, ErrorCode::BadImage, "pixel value above maxval");
      px = static_cast<double>(value) / 255.0;
    }
  }
  return img;
}

std::vector<unsigned char> quantize(const Image& image) {
  std::vector<unsigned char> bytes(image.pixels.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double x = std::clamp(image.pixels[i], 0.0, 1.0);
    bytes[i] = static_cast<unsigned char>(std::floor(255.0 * x + 0.5));
  }
  return bytes;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  const auto bytes = quantize(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorCode::IoError, "write failed: " + path.string());
}

double psnr(const Image& x, const Image& ref) {
  require(x.width == ref.width && x.height == ref.height, ErrorCode::DimensionMismatch, "psnr image sizes");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    const double d = x.pixels[i] - ref.pixels[i];
    sum += d * d;
  }
  if (sum == 0.0) return std::numeric_limits<double>::infinity();
  const double rmse = std::sqrt(sum / static_cast<double>(x.pixels.size()));
  return 20.0 * std::log10(1.0 / rmse);
}

Image phantom(std::size_t width, std::size_t height) {
  require(width >= 16 && height >= 16, ErrorCode::InvalidArgument, "phantom needs at least 16x16");
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  Image img(width, height, 0.2);
  const double radius = 0.3 * std::min(w, h);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - w / 2.0;
      const double dy = static_cast<double>(y) + 0.5 - h / 2.0;
      if (dx * dx + dy * dy <= radius * radius) img.at(x, y) = 0.8;
    }
  }
  const auto sx0 = static_cast<std::size_t>(0.65 * w);
  const auto sx1 = static_cast<std::size_t>(0.9 * w);
  const auto sy0 = static_cast<std::size_t>(0.1 * h);
  const auto sy1 = static_cast<std::size_t>(0.3 * h);
  for (std::size_t y = sy0; y < sy1; ++y)
    for (std::size_t x = sx0; x < sx1; ++x) img.at(x, y) = 0.5;
  const auto ly = static_cast<std::size_t>(0.85 * h);
  const auto lx0 = static_cast<std::size_t>(0.1 * w);
  const auto lx1 = static_cast<std::size_t>(0.9 * w);
  for (std::size_t y = ly; y < ly + 2; ++y)
    for (std::size_t x = lx0; x < lx1; ++x) img.at(x, y) = 0.95;
  return img;
}

}  // namespace ce
