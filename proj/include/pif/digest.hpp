#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pif/image.hpp"

namespace pif {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// SHA-256 over the dimensions and 16-bit-quantized samples of an image.
std::string image_digest(const RasterImage& img);

}  // namespace pif
