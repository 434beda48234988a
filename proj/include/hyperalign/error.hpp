#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyperalign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape, range, finiteness).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The geometry is undefined for the given points, e.g. a cone apex at the origin.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// A correlation metric is undefined (too few samples or zero variance).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. Carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed file with invalid record contents (e.g. a NaN embedding).
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t record)
      : Error(what + " (record " + std::to_string(record) + ")"), record_(record) {}

  std::size_t record() const noexcept { return record_; }

 private:
  std::size_t record_;
};

/// Wraps an error raised while processing one sample of a batch.
class SampleError : public Error {
 public:
  SampleError(const std::string& what, std::size_t index)
      : Error("sample " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace hyperalign
