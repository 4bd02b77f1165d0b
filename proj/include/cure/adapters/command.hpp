#pragma once

// Adapters that shell out to an operator-supplied command. Prompts and path
// lists travel through temp files, never through the command line itself.
// Credentials belong in the command's environment, not in run configs.
//
// Placeholders:
//   T2I:      {prompt_file} {seed} {out}   exit 0 = image at {out}, exit 3 = refused
//   encoder:  {list_file}                  stdout: one line of floats per listed image
//   VLM text: {text_file}                  stdout: one line of floats

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cure/embed.hpp"
#include "cure/error.hpp"
#include "cure/genpipe.hpp"
#include "cure/util/fs.hpp"

namespace cure::command {

struct RunOutput {
  int status = -1;
  std::string out;
};

inline std::string substitute(std::string tmpl, const std::string& key, const std::string& value) {
  for (auto pos = tmpl.find(key); pos != std::string::npos; pos = tmpl.find(key, pos + value.size())) {
    tmpl.replace(pos, key.size(), value);
  }
  return tmpl;
}

/// Single-quotes `s` for /bin/sh.
inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

inline RunOutput run(const std::string& cmd) {
  RunOutput r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) fail(ErrorKind::Adapter, "cannot start '" + cmd + "'");
  std::array<char, 4096> buf{};
  while (auto n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

class TempFile {
 public:
  explicit TempFile(const std::string& content, const std::string& suffix = ".txt") {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("cure-" + std::to_string(rng()) + suffix);
    util::atomic_write(path_, content);
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> parse_floats(const std::string& line) {
  std::vector<float> v;
  std::istringstream in(line);
  float f;
  while (in >> f) v.push_back(f);
  if (!in.eof()) fail(ErrorKind::Encoder, "non-numeric token in embedding output");
  return v;
}

class CommandT2IBackend : public T2IBackend {
 public:
  CommandT2IBackend(std::string id, std::string command, std::string version = "command/1",
                    bool supports_seed = true, double rate_per_minute = 0)
      : id_(std::move(id)), cmd_(std::move(command)), version_(std::move(version)), seeds_(supports_seed),
        rate_(rate_per_minute) {}

  std::string system_id() const override { return id_; }
  std::string version() const override { return version_; }
  bool supports_seed() const override { return seeds_; }
  double rate_limit_per_minute() const override { return rate_; }

  GenerationOutcome generate(const std::string& prompt, std::uint64_t seed) override {
    TempFile prompt_file(prompt);
    TempFile out_file("", ".png");
    std::filesystem::remove(out_file.path());
    auto cmd = substitute(cmd_, "{prompt_file}", shell_quote(prompt_file.path().string()));
    cmd = substitute(cmd, "{seed}", std::to_string(seed));
    cmd = substitute(cmd, "{out}", shell_quote(out_file.path().string()));
    auto r = run(cmd);
    if (r.status == 3) return GenerationOutcome::refused(r.out);
    if (r.status != 0) return GenerationOutcome::error("exit status " + std::to_string(r.status) + ": " + r.out);
    if (!std::filesystem::exists(out_file.path())) return GenerationOutcome::error("command wrote no image");
    return GenerationOutcome::image(util::read_bytes(out_file.path()));
  }

 private:
  std::string id_, cmd_, version_;
  bool seeds_;
  double rate_;
};

class CommandEncoder : public VlmAdapter {
 public:
  CommandEncoder(std::string id, std::string image_command, std::string text_command = {},
                 std::string version = "command/1")
      : id_(std::move(id)), image_cmd_(std::move(image_command)), text_cmd_(std::move(text_command)),
        version_(std::move(version)) {}

  std::string id() const override { return id_; }
  std::string version() const override { return version_; }

  Matrix encode(const std::vector<std::filesystem::path>& images) override {
    std::string list;
    for (const auto& p : images) list += p.string() + "\n";
    TempFile lf(list);
    auto r = run(substitute(image_cmd_, "{list_file}", shell_quote(lf.path().string())));
    if (r.status != 0) fail(ErrorKind::Encoder, id_ + ": exit status " + std::to_string(r.status));
    std::vector<std::vector<float>> rows;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) rows.push_back(parse_floats(line));
    }
    if (rows.size() != images.size()) {
      fail(ErrorKind::Encoder, id_ + ": " + std::to_string(rows.size()) + " rows for " +
                                   std::to_string(images.size()) + " images");
    }
    Matrix m(Eigen::Index(rows.size()), rows.empty() ? 0 : Eigen::Index(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (Eigen::Index(rows[i].size()) != m.cols()) fail(ErrorKind::Encoder, id_ + ": ragged embedding rows");
      for (std::size_t k = 0; k < rows[i].size(); ++k) m(Eigen::Index(i), Eigen::Index(k)) = rows[i][k];
    }
    return m;
  }

  Vector encode_text(const std::string& prompt) override {
    if (text_cmd_.empty()) fail(ErrorKind::Adapter, id_ + ": no text command configured");
    TempFile tf(prompt);
    auto r = run(substitute(text_cmd_, "{text_file}", shell_quote(tf.path().string())));
    if (r.status != 0) fail(ErrorKind::Adapter, id_ + ": exit status " + std::to_string(r.status));
    auto v = parse_floats(r.out);
    return Eigen::Map<Vector>(v.data(), Eigen::Index(v.size()));
  }

 private:
  std::string id_, image_cmd_, text_cmd_, version_;
};

}  // namespace cure::command
