#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "cure/error.hpp"

namespace cure::util {

inline std::array<std::uint8_t, 32> sha256_bytes(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
    fail(ErrorKind::Io, "sha256 digest failed");
  }
  return out;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

inline std::string sha256_hex(std::string_view text) {
  auto d = sha256_bytes({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  return to_hex(d);
}

inline std::string sha256_hex(std::span<const std::uint8_t> data) { return to_hex(sha256_bytes(data)); }

// First 8 digest bytes as an integer; used to derive deterministic seeds.
inline std::uint64_t sha256_u64(std::string_view text) {
  auto d = sha256_bytes({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
  return v;
}

}  // namespace cure::util
