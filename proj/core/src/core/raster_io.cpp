#include "alforge/core/raster_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "alforge/core/error.hpp"

namespace alforge {
namespace {

struct RawRaster {
  int rows = 0;
  int cols = 0;
  int maxval = 0;
  std::vector<int> samples;
};

void skip_whitespace_and_comments(std::istream& in) {
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
}

RawRaster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCategory::Data, "cannot open raster '" + path.string() + "'");
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5") throw_error(ErrorCategory::Data, "'" + path.string() + "' is not a binary PGM");
  RawRaster raster;
  skip_whitespace_and_comments(in);
  in >> raster.cols;
  skip_whitespace_and_comments(in);
  in >> raster.rows;
  skip_whitespace_and_comments(in);
  in >> raster.maxval;
  in.get();
  if (!in || raster.rows <= 0 || raster.cols <= 0 || raster.maxval <= 0 || raster.maxval > 65535)
    throw_error(ErrorCategory::Data, "malformed PGM header in '" + path.string() + "'");

  const std::size_t n = static_cast<std::size_t>(raster.rows) * raster.cols;
  const bool wide = raster.maxval > 255;
  std::vector<unsigned char> bytes(n * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw_error(ErrorCategory::Data, "truncated PGM data in '" + path.string() + "'");
  raster.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    raster.samples[i] = wide ? (bytes[2 * i] << 8) | bytes[2 * i + 1] : bytes[i];
  }
  return raster;
}

void write_pgm(const std::filesystem::path& path, int rows, int cols, int maxval,
               const std::vector<int>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorCategory::Data, "cannot write raster '" + path.string() + "'");
  out << "P5\n" << cols << ' ' << rows << '\n' << maxval << '\n';
  const bool wide = maxval > 255;
  std::vector<unsigned char> bytes;
  bytes.reserve(samples.size() * (wide ? 2 : 1));
  for (int s : samples) {
    if (wide) bytes.push_back(static_cast<unsigned char>(s >> 8));
    bytes.push_back(static_cast<unsigned char>(s & 0xff));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_error(ErrorCategory::Data, "failed writing raster '" + path.string() + "'");
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  const RawRaster raw = read_pgm(path);
  Image image(raw.rows, raw.cols);
  auto out = image.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(raw.samples[i]) / raw.maxval;
  }
  return image;
}

void write_image(const std::filesystem::path& path, const Image& image, BitDepth depth) {
  const int maxval = depth == BitDepth::Sixteen ? 65535 : 255;
  std::vector<int> samples(image.size());
  auto in = image.values();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = std::clamp(in[i], 0.0, 1.0);
    samples[i] = static_cast<int>(std::lround(v * maxval));
  }
  write_pgm(path, image.rows(), image.cols(), maxval, samples);
}

Mask read_mask(const std::filesystem::path& path) {
  const RawRaster raw = read_pgm(path);
  Mask mask(raw.rows, raw.cols);
  auto out = mask.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int s = raw.samples[i];
    if (s != 0 && s != raw.maxval)
      throw_error(ErrorCategory::Data, "mask '" + path.string() + "' is not binary {0, max}");
    out[i] = s == raw.maxval ? 1 : 0;
  }
  return mask;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  std::vector<int> samples(mask.size());
  auto in = mask.values();
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = in[i] ? 255 : 0;
  write_pgm(path, mask.rows(), mask.cols(), 255, samples);
}

Image quantize16(const Image& image) {
  Image out = image;
  for (double& v : out.values()) {
    v = static_cast<double>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0)) / 65535.0;
  }
  return out;
}

}  // namespace alforge
