#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace epidcov {

enum class Errc {
  NegativeDistance,
  TriangleViolation,
  FullyDegenerate,
  InvalidJoint,
  EmptyTable,
  SampleTooLarge,
  MarginMismatch,
  DegenerateMargin,
  MafOutOfRange,
  NegativeCell,
  SnpListMismatch,
  EmptyMatrix,
  ParseError,
  DuplicateSnpId,
  InconsistentRowLength,
  KTooLarge,
  NoFlaggedPairs,
  BadArgument,
};

/// All library errors carry a machine-checkable code plus a human message.
class Error : public std::runtime_error {
public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace epidcov
