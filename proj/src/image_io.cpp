#include "pif/image_io.hpp"

#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "pif/error.hpp"

namespace pif {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct MemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + count > reader->bytes.size()) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, reader->bytes.data() + reader->offset, count);
  reader->offset += count;
}

void png_silent_warning(png_structp, png_const_charp) {}

struct PngErrorState {
  char message[256] = "png decode failed";
};

void png_record_error(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}

DecodedImage decode_png(std::span<const std::uint8_t> bytes) {
  PngErrorState err;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_record_error, png_silent_warning);
  if (!png) throw Error(ErrorCode::Decode, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::Decode, "png_create_info_struct failed");
  }

  MemoryReader reader{bytes, 0};
  std::vector<std::uint8_t> raw;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 8;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Decode, std::string("png: ") + err.message);
  }

  png_set_read_fn(png, &reader, png_read_memory);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info) == 16 ? 16 : 8;
  const int color = png_get_color_type(png, info);

  if (width == 0 || height == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::ZeroDimension, "png has zero dimension");
  }

  png_set_expand(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raw.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = 3 * static_cast<std::size_t>(width) * height;
  std::vector<double> samples(n);
  if (depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
      samples[i] = v / 65535.0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) samples[i] = raw[i] / 255.0;
  }
  return {RasterImage(width, height, std::move(samples)), ImageFormat::Png, depth};
}

struct JpegErrorState {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_record_error(j_common_ptr cinfo) {
  auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, state->message);
  std::longjmp(state->jump, 1);
}

void jpeg_silent_message(j_common_ptr, int) {}

DecodedImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorState err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_record_error;
  err.base.emit_message = jpeg_silent_message;
  std::vector<std::uint8_t> raw;

  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::Decode, std::string("jpeg: ") + err.message);
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t width = cinfo.output_width;
  const std::size_t height = cinfo.output_height;
  if (width == 0 || height == 0) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::ZeroDimension, "jpeg has zero dimension");
  }
  raw.resize(3 * width * height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = raw.data() + 3 * width * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  // libjpeg pads truncated streams with gray and only warns; treat that as corrupt.
  const bool truncated = err.base.num_warnings > 0;
  jpeg_destroy_decompress(&cinfo);
  if (truncated) throw Error(ErrorCode::Decode, "jpeg: corrupt or truncated data");

  std::vector<double> samples(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) samples[i] = raw[i] / 255.0;
  return {RasterImage(width, height, std::move(samples)), ImageFormat::Jpeg, 8};
}

void png_write_memory(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

DecodedImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(bytes);
  }
  throw Error(ErrorCode::UnsupportedFormat, "not a PNG or JPEG stream");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Unreadable, "read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

DecodedImage load_image_info(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    throw Error(ErrorCode::Unreadable, path.string() + " is a directory");
  }
  const auto bytes = read_file_bytes(path);
  return decode_image(bytes);
}

RasterImage load_image(const std::filesystem::path& path) {
  return load_image_info(path).image;
}

std::vector<std::uint8_t> encode_png(const RasterImage& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorCode::InvalidArgument, "bit depth must be 8 or 16");
  }
  std::vector<std::uint8_t> out;
  const std::size_t width = img.width();
  const std::size_t height = img.height();
  const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  std::vector<std::uint8_t> raw(3 * width * height * bytes_per_sample);
  const auto src = img.samples();
  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto code = static_cast<unsigned>(std::lround(src[i] * scale));
    if (bit_depth == 16) {
      raw[2 * i] = static_cast<std::uint8_t>(code >> 8);
      raw[2 * i + 1] = static_cast<std::uint8_t>(code & 0xFF);
    } else {
      raw[i] = static_cast<std::uint8_t>(code);
    }
  }
  std::vector<png_bytep> rows(height);
  const std::size_t row_bytes = 3 * width * bytes_per_sample;
  for (std::size_t y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;

  PngErrorState err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_record_error, png_silent_warning);
  if (!png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, std::string("png encode: ") + err.message);
  }
  png_set_write_fn(png, &out, png_write_memory, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void save_image(const RasterImage& img, const std::filesystem::path& path, int bit_depth) {
  const auto bytes = encode_png(img, bit_depth);
  write_file_bytes(path, bytes);
}

}  // namespace pif
