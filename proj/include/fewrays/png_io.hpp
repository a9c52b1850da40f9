#pragma once

#include <cstdint>
#include <filesystem>

#include "fewrays/image.hpp"

namespace fewrays {

/// Reads an 8-bit (or 16-bit, downconverted) gray/RGB/RGBA PNG. Channels map
/// to [0,1] by v/255; alpha is composited over a white background.
/// Throws DataError on missing or malformed files.
Image load_png(const std::filesystem::path& path);

/// Writes 8-bit RGB. Channels are clamped to [0,1] and quantized with
/// round-half-up, so save(load(x)) reproduces x exactly.
void save_png(const Image& image, const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG from values in [0,1] (1 -> 255).
void save_png_gray(const ScalarMap& map, const std::filesystem::path& path);

std::uint8_t quantize_channel(double value);

}  // namespace fewrays
