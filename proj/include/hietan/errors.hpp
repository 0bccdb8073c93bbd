#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hietan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CyclicHierarchy : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonBinaryValue : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingClassColumn : public ParseError {
 public:
  using ParseError::ParseError;
};

class TooFewInstances : public Error {
 public:
  using Error::Error;
};

class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

class EmptyFeatureSet : public Error {
 public:
  using Error::Error;
};

class UnknownEdge : public Error {
 public:
  using Error::Error;
};

class EmptyTrainingSet : public Error {
 public:
  using Error::Error;
};

class UndefinedClassSide : public Error {
 public:
  using Error::Error;
};

class IncompleteTable : public Error {
 public:
  using Error::Error;
};

class DegenerateRanks : public Error {
 public:
  using Error::Error;
};

class WrongMethod : public Error {
 public:
  using Error::Error;
};

}  // namespace hietan
