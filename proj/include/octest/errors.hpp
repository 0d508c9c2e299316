#pragma once

#include <stdexcept>
#include <string>

namespace octest {

// Base for every error the library raises on bad inputs or degenerate data.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyTable : Error {
  using Error::Error;
};

struct ZeroCell : Error {
  using Error::Error;
};

struct DegenerateMarginal : Error {
  using Error::Error;
};

struct DegenerateStratum : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct Infeasible : Error {
  using Error::Error;
};

struct ZeroThreshold : Error {
  using Error::Error;
};

struct InconsistentEvidence : Error {
  using Error::Error;
};

struct NoTraitPresent : Error {
  using Error::Error;
};

struct NotSymmetric : Error {
  using Error::Error;
};

struct NoAcceptedSamples : Error {
  using Error::Error;
};

struct DegenerateMean : Error {
  using Error::Error;
};

struct MissingColumn : Error {
  using Error::Error;
};

struct UnmappableValue : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

}  // namespace octest
