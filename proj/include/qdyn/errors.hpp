#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qdyn {

enum class ErrorKind {
  InvalidArgument,
  ConvergenceFailure,
  UnivalenceViolation,
  AmbiguousBand,
  OutsideDomain,
  HigherOrderCircleCritical,
  NewtonDivergence,
  FitUnstable,
  NotATree,
  BadBracket,
  InsideFundamentalDomain,
  SizeCapExceeded,
  NumericRange,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::UnivalenceViolation: return "UnivalenceViolation";
    case ErrorKind::AmbiguousBand: return "AmbiguousBand";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::HigherOrderCircleCritical: return "HigherOrderCircleCritical";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::FitUnstable: return "FitUnstable";
    case ErrorKind::NotATree: return "NotATree";
    case ErrorKind::BadBracket: return "BadBracket";
    case ErrorKind::InsideFundamentalDomain: return "InsideFundamentalDomain";
    case ErrorKind::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorKind::NumericRange: return "NumericRange";
  }
  return "Unknown";
}

/// Base of every exception thrown by the library. The kind is the stable,
/// machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qdyn
