#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fderiv {

enum class ErrorKind {
  GridMismatch,
  InvalidGrid,
  InvalidCurve,
  EmptySample,
  InsufficientSample,
  AsymmetricMatrix,
  NegativeEigenvalue,
  DegenerateSpectrum,
  InvalidArgument,
  EmptyNeighborhood,
  ZeroDifference,
  EmptyPairNeighborhood,
  InvalidDirection,
  MissingComponent,
  ZeroGradient,
  FormatError,
  InsufficientTimepoints,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::InvalidCurve: return "InvalidCurve";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::InsufficientSample: return "InsufficientSample";
    case ErrorKind::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorKind::ZeroDifference: return "ZeroDifference";
    case ErrorKind::EmptyPairNeighborhood: return "EmptyPairNeighborhood";
    case ErrorKind::InvalidDirection: return "InvalidDirection";
    case ErrorKind::MissingComponent: return "MissingComponent";
    case ErrorKind::ZeroGradient: return "ZeroGradient";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::InsufficientTimepoints: return "InsufficientTimepoints";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace fderiv
