#pragma once

// Minimal 8-bit RGB PNG codec (zlib-backed). Enough for the image store,
// the mock adapters, and corrupt-file detection at embedding time.

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cure/error.hpp"
#include "cure/util/fs.hpp"

namespace cure {

struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> rgb;  ///< row-major, 3 bytes per pixel

  std::uint8_t at(std::uint32_t x, std::uint32_t y, int ch) const { return rgb[(std::size_t(y) * width + x) * 3 + ch]; }
  bool operator==(const Image&) const = default;
};

namespace png_detail {

inline constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4], std::span<const std::uint8_t> data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  auto start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

inline std::uint8_t paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

}  // namespace png_detail

/// Deterministic encoding: filter 0 on every row, fixed zlib level.
inline std::vector<std::uint8_t> encode_png(const Image& img) {
  using namespace png_detail;
  if (img.width == 0 || img.height == 0 || img.rgb.size() != std::size_t(img.width) * img.height * 3) {
    fail(ErrorKind::InvalidArgument, "encode_png: inconsistent image dimensions");
  }
  std::vector<std::uint8_t> raw;
  raw.reserve(std::size_t(img.height) * (1 + std::size_t(img.width) * 3));
  for (std::uint32_t y = 0; y < img.height; ++y) {
    raw.push_back(0);
    auto row = img.rgb.begin() + std::ptrdiff_t(std::size_t(y) * img.width * 3);
    raw.insert(raw.end(), row, row + std::ptrdiff_t(img.width) * 3);
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(zlen);
  if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    fail(ErrorKind::Io, "encode_png: deflate failed");
  }
  z.resize(zlen);

  std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());
  std::vector<std::uint8_t> ihdr;
  put_u32(ihdr, img.width);
  put_u32(ihdr, img.height);
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // depth 8, RGB, deflate, filter set 0, no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", z);
  put_chunk(out, "IEND", {});
  return out;
}

/// Decodes 8-bit RGB non-interlaced PNGs; throws Error(Decode) on anything
/// truncated, corrupt, or outside that profile.
inline Image decode_png(std::span<const std::uint8_t> bytes) {
  using namespace png_detail;
  if (bytes.size() < 8 || !std::equal(kSignature.begin(), kSignature.end(), bytes.begin())) {
    fail(ErrorKind::Decode, "not a PNG file");
  }
  Image img;
  std::vector<std::uint8_t> idat;
  bool have_ihdr = false, have_iend = false;
  std::size_t pos = 8;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 12) fail(ErrorKind::Decode, "truncated chunk header");
    std::uint32_t len = get_u32(&bytes[pos]);
    if (len > bytes.size() - pos - 12) fail(ErrorKind::Decode, "truncated chunk");
    const std::uint8_t* type = &bytes[pos + 4];
    const std::uint8_t* data = &bytes[pos + 8];
    std::uint32_t crc = get_u32(&bytes[pos + 8 + len]);
    if (crc32(0L, type, len + 4) != crc) fail(ErrorKind::Decode, "chunk CRC mismatch");
    std::string t(reinterpret_cast<const char*>(type), 4);
    if (t == "IHDR") {
      if (len != 13) fail(ErrorKind::Decode, "bad IHDR");
      img.width = get_u32(data);
      img.height = get_u32(data + 4);
      if (data[8] != 8 || data[9] != 2 || data[12] != 0) {
        fail(ErrorKind::Decode, "unsupported PNG profile (need 8-bit RGB, non-interlaced)");
      }
      if (img.width == 0 || img.height == 0 || img.width > 16384 || img.height > 16384) {
        fail(ErrorKind::Decode, "bad PNG dimensions");
      }
      have_ihdr = true;
    } else if (t == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (t == "IEND") {
      have_iend = true;
      break;
    }
    pos += 12 + len;
  }
  if (!have_ihdr || !have_iend) fail(ErrorKind::Decode, "missing IHDR or IEND");

  const std::size_t stride = std::size_t(img.width) * 3;
  std::vector<std::uint8_t> raw(img.height * (stride + 1));
  uLongf rawlen = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &rawlen, idat.data(), static_cast<uLong>(idat.size())) != Z_OK || rawlen != raw.size()) {
    fail(ErrorKind::Decode, "corrupt image data");
  }

  img.rgb.assign(std::size_t(img.height) * stride, 0);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* dst = &img.rgb[y * stride];
    const std::uint8_t* prev = y ? &img.rgb[(y - 1) * stride] : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      int a = i >= 3 ? dst[i - 3] : 0;
      int b = prev ? prev[i] : 0;
      int c = (prev && i >= 3) ? prev[i - 3] : 0;
      int pred = 0;
      switch (filter) {
        case 0: pred = 0; break;
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = (a + b) / 2; break;
        case 4: pred = paeth(a, b, c); break;
        default: fail(ErrorKind::Decode, "bad PNG filter type");
      }
      dst[i] = static_cast<std::uint8_t>(src[i] + pred);
    }
  }
  return img;
}

inline Image read_png(const std::filesystem::path& p) {
  auto bytes = util::read_bytes(p);
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    fail(ErrorKind::Decode, p.string() + ": " + e.what());
  }
}

/// Structural integrity check for the formats the store accepts (PNG fully,
/// JPEG by start/end markers). Returns an empty string when the file looks sound.
inline std::string probe_image(const std::filesystem::path& p) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = util::read_bytes(p);
  } catch (const Error& e) {
    return e.what();
  }
  if (bytes.size() >= 8 && std::equal(png_detail::kSignature.begin(), png_detail::kSignature.end(), bytes.begin())) {
    try {
      decode_png(bytes);
      return {};
    } catch (const Error& e) {
      return e.what();
    }
  }
  if (bytes.size() >= 4 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
    auto n = bytes.size();
    // Trailing padding after EOI is common; scan the tail.
    for (std::size_t i = n - 1; i > 1 && i + 64 > n; --i) {
      if (bytes[i - 1] == 0xFF && bytes[i] == 0xD9) return {};
    }
    return "truncated JPEG (no EOI marker)";
  }
  return "unrecognized image format";
}

}  // namespace cure
