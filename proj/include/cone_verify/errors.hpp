#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cone_verify {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// A quadratic form has an eigenvalue below the degeneracy tolerance.
class NonDegeneracyViolation : public Error {
 public:
  using Error::Error;
};

/// A subspace whose Gram matrix under J is singular.
class DegenerateSubspace : public Error {
 public:
  using Error::Error;
};

class FlowDirectionNotPositive : public Error {
 public:
  using Error::Error;
};

class SingularPoint : public Error {
 public:
  using Error::Error;
};

class EscapedRegion : public Error {
 public:
  EscapedRegion(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class SeparationFailedOnOrbit : public Error {
 public:
  SeparationFailedOnOrbit(const std::string& what, std::size_t grid_index)
      : Error(what), grid_index_(grid_index) {}
  std::size_t grid_index() const { return grid_index_; }

 private:
  std::size_t grid_index_;
};

class NegativeVectorEscapedCone : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last_gap)
      : Error(what), last_gap_(last_gap) {}
  double last_gap() const { return last_gap_; }

 private:
  double last_gap_;
};

class NotJSeparated : public Error {
 public:
  using Error::Error;
};

class NonPositiveSpectrum : public Error {
 public:
  using Error::Error;
};

class IllConditionedSplitting : public Error {
 public:
  using Error::Error;
};

class SingularityInRegion : public Error {
 public:
  using Error::Error;
};

class UnknownField : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression text; position is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public ParseError {
 public:
  UnknownIdentifier(const std::string& name, std::size_t position)
      : ParseError("unknown identifier '" + name + "'", position),
        name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Evaluation outside a function's domain (log of a negative, x/0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace cone_verify
