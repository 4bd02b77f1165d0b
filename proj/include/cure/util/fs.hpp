#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cure/error.hpp"

namespace cure::util {

namespace fs = std::filesystem;

inline std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temp file then rename into place, so readers only ever see
// complete files. Concurrent writers of identical content are last-writer-wins.
inline void atomic_write(const fs::path& p, std::span<const std::uint8_t> data) {
  static std::atomic<std::uint64_t> counter{0};
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = p;
  tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) fail(ErrorKind::Io, "short write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorKind::Io, "rename " + tmp.string() + " -> " + p.string() + ": " + ec.message());
  }
}

inline void atomic_write(const fs::path& p, std::string_view text) {
  atomic_write(p, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace cure::util
