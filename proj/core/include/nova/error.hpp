#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nova {

enum class ErrorKind {
  InvalidParameter,
  EmptyDomain,
  EmptyTail,
  DegenerateDistribution,
  UndefinedEstimate,
  UndefinedFraction,
  Underdetermined,
  FrontierDegenerate,
  DegenerateBaseline,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so that callers (the CLI
// in particular) can map it to an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::EmptyDomain: return "empty-domain";
    case ErrorKind::EmptyTail: return "empty-tail";
    case ErrorKind::DegenerateDistribution: return "degenerate-distribution";
    case ErrorKind::UndefinedEstimate: return "undefined-estimate";
    case ErrorKind::UndefinedFraction: return "undefined-fraction";
    case ErrorKind::Underdetermined: return "underdetermined";
    case ErrorKind::FrontierDegenerate: return "frontier-degenerate";
    case ErrorKind::DegenerateBaseline: return "degenerate-baseline";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace nova
