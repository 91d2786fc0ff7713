#pragma once

#include <filesystem>

#include "alforge/core/grid.hpp"

namespace alforge {

// Portable graymap (binary PGM, P5) input/output. 8- and 16-bit depths are
// supported; 16-bit samples are big-endian as the format requires.

enum class BitDepth { Eight, Sixteen };

Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image,
                 BitDepth depth = BitDepth::Sixteen);

/// Masks must be stored strictly as {0, maxval}.
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

/// Rounds every pixel to the nearest 16-bit level, so a subsequent
/// write/read cycle is lossless.
Image quantize16(const Image& image);

}  // namespace alforge
