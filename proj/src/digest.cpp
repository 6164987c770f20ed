#include "pif/digest.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include <openssl/evp.h>

#include "pif/error.hpp"

namespace pif {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string image_digest(const RasterImage& img) {
  std::vector<std::uint8_t> buf;
  buf.reserve(16 + 2 * img.samples().size());
  auto put32 = [&](std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) buf.push_back(static_cast<std::uint8_t>(v >> s));
  };
  put32(static_cast<std::uint32_t>(img.width()));
  put32(static_cast<std::uint32_t>(img.height()));
  for (double v : img.samples()) {
    const auto code = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    buf.push_back(static_cast<std::uint8_t>(code >> 8));
    buf.push_back(static_cast<std::uint8_t>(code & 0xFF));
  }
  return sha256_hex(buf);
}

}  // namespace pif
