#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pif/image.hpp"

namespace pif {

enum class ImageFormat { Png, Jpeg };

struct DecodedImage {
  RasterImage image;
  ImageFormat format = ImageFormat::Png;
  int bit_depth = 8;  ///< 8 or 16 sample depth of the source
};

/// Decodes PNG (8/16-bit; gray, RGB, palette; alpha dropped) or JPEG from memory.
/// Errors: UnsupportedFormat (unknown signature), Decode (corrupt or truncated),
/// ZeroDimension.
DecodedImage decode_image(std::span<const std::uint8_t> bytes);

/// Reads a file; Unreadable when it cannot be opened, otherwise as decode_image.
RasterImage load_image(const std::filesystem::path& path);
DecodedImage load_image_info(const std::filesystem::path& path);

/// PNG encoding with rounding to the nearest code value. bit_depth is 8 or 16.
std::vector<std::uint8_t> encode_png(const RasterImage& img, int bit_depth);

/// Writes a PNG; Io error when the path is not writable.
void save_image(const RasterImage& img, const std::filesystem::path& path, int bit_depth);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace pif
