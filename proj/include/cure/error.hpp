#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cure {

enum class ErrorKind {
  Parse,
  Schema,
  MissingField,
  InvalidArgument,
  Transport,
  NotFound,
  Download,
  BelowThreshold,
  Decode,
  Encoder,
  DimensionMismatch,
  EmptySet,
  MissingEmbedding,
  AllRefused,
  MissingComponent,
  NonPsd,
  NoJson,
  OutOfRange,
  MissingKey,
  LikertRange,
  UndefinedRate,
  LengthMismatch,
  EmptyIntersection,
  UnknownGroup,
  Prerequisite,
  Adapter,
  Io,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::MissingField: return "missing-field";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Download: return "download";
    case ErrorKind::BelowThreshold: return "below-threshold";
    case ErrorKind::Decode: return "decode";
    case ErrorKind::Encoder: return "encoder";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::EmptySet: return "empty-set";
    case ErrorKind::MissingEmbedding: return "missing-embedding";
    case ErrorKind::AllRefused: return "all-refused";
    case ErrorKind::MissingComponent: return "missing-component";
    case ErrorKind::NonPsd: return "non-psd";
    case ErrorKind::NoJson: return "no-json";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::MissingKey: return "missing-key";
    case ErrorKind::LikertRange: return "likert-range";
    case ErrorKind::UndefinedRate: return "undefined-rate";
    case ErrorKind::LengthMismatch: return "length-mismatch";
    case ErrorKind::EmptyIntersection: return "empty-intersection";
    case ErrorKind::UnknownGroup: return "unknown-group";
    case ErrorKind::Prerequisite: return "prerequisite";
    case ErrorKind::Adapter: return "adapter";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cure
