#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sketchycgm {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SKETCHYCGM_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  };

SKETCHYCGM_DEFINE_ERROR(InvalidArgument)
SKETCHYCGM_DEFINE_ERROR(DimensionMismatch)
SKETCHYCGM_DEFINE_ERROR(NonFiniteInput)
SKETCHYCGM_DEFINE_ERROR(ImaginaryLeakage)
SKETCHYCGM_DEFINE_ERROR(DomainError)
SKETCHYCGM_DEFINE_ERROR(RankDeficientPsiQ)
SKETCHYCGM_DEFINE_ERROR(ZeroGradient)
SKETCHYCGM_DEFINE_ERROR(TooLargeForDense)
SKETCHYCGM_DEFINE_ERROR(ZeroTruth)
SKETCHYCGM_DEFINE_ERROR(IndexOutOfRange)
SKETCHYCGM_DEFINE_ERROR(IoError)

#undef SKETCHYCGM_DEFINE_ERROR

/// Iterative eigen/singular solver ran out of iterations.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, int iterations)
      : Error("NoConvergence", what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// Malformed input file; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("ParseError", what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw DimensionMismatch(msg);
}

}  // namespace detail
}  // namespace sketchycgm
