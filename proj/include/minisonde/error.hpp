#pragma once

#include <stdexcept>
#include <string>

namespace minisonde {

enum class ErrorKind {
  Io,
  Parse,
  IncompleteGrid,
  Validation,
  OutOfDomain,
  DomainExit,
  Dimension,
  InvalidData,
  NotPositiveDefinite,
  DegenerateForecast,
  EmptyDataset,
  InvalidBudget,
  EmptyProfile,
  DegenerateCorrelation,
};

inline const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

template <ErrorKind K>
class KindedError : public Error {
 public:
  explicit KindedError(const std::string& what) : Error(K, what) {}
};

using IoError = KindedError<ErrorKind::Io>;
using ParseError = KindedError<ErrorKind::Parse>;
using IncompleteGrid = KindedError<ErrorKind::IncompleteGrid>;
using ValidationError = KindedError<ErrorKind::Validation>;
using OutOfDomain = KindedError<ErrorKind::OutOfDomain>;
using DomainExit = KindedError<ErrorKind::DomainExit>;
using DimensionError = KindedError<ErrorKind::Dimension>;
using InvalidData = KindedError<ErrorKind::InvalidData>;
using NotPositiveDefinite = KindedError<ErrorKind::NotPositiveDefinite>;
using DegenerateForecast = KindedError<ErrorKind::DegenerateForecast>;
using EmptyDataset = KindedError<ErrorKind::EmptyDataset>;
using InvalidBudget = KindedError<ErrorKind::InvalidBudget>;
using EmptyProfile = KindedError<ErrorKind::EmptyProfile>;
using DegenerateCorrelation = KindedError<ErrorKind::DegenerateCorrelation>;

/// Throws the KindedError matching `kind`.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  switch (kind) {
    case ErrorKind::Io: throw IoError(what);
    case ErrorKind::Parse: throw ParseError(what);
    case ErrorKind::IncompleteGrid: throw IncompleteGrid(what);
    case ErrorKind::Validation: throw ValidationError(what);
    case ErrorKind::OutOfDomain: throw OutOfDomain(what);
    case ErrorKind::DomainExit: throw DomainExit(what);
    case ErrorKind::Dimension: throw DimensionError(what);
    case ErrorKind::InvalidData: throw InvalidData(what);
    case ErrorKind::NotPositiveDefinite: throw NotPositiveDefinite(what);
    case ErrorKind::DegenerateForecast: throw DegenerateForecast(what);
    case ErrorKind::EmptyDataset: throw EmptyDataset(what);
    case ErrorKind::InvalidBudget: throw InvalidBudget(what);
    case ErrorKind::EmptyProfile: throw EmptyProfile(what);
    case ErrorKind::DegenerateCorrelation: throw DegenerateCorrelation(what);
  }
  throw Error(kind, what);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::IncompleteGrid: return "IncompleteGrid";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::DomainExit: return "DomainExit";
    case ErrorKind::Dimension: return "DimensionError";
    case ErrorKind::InvalidData: return "InvalidData";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DegenerateForecast: return "DegenerateForecast";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::InvalidBudget: return "InvalidBudget";
    case ErrorKind::EmptyProfile: return "EmptyProfile";
    case ErrorKind::DegenerateCorrelation: return "DegenerateCorrelation";
  }
  return "Error";
}

}  // namespace minisonde
