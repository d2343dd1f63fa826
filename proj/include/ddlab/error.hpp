#pragma once

#include <stdexcept>
#include <string>

namespace ddlab {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or non-positive dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a formula (e.g. gamma not in (0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A linear system that the requested estimator cannot solve without a pseudoinverse.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Closed form requested inside the interpolation band p-1 <= n <= p+1.
class UndefinedRegimeError : public Error {
 public:
  using Error::Error;
};

/// A design column with zero norm where a normalization needs it.
class DegenerateColumnError : public Error {
 public:
  DegenerateColumnError(const std::string& what, long column)
      : Error(what), column_(column) {}
  long column() const { return column_; }

 private:
  long column_;
};

/// Kernel matrix with no positive eigenvalue.
class DegenerateKernelError : public Error {
 public:
  using Error::Error;
};

/// Matrix that should be symmetric is not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Precondition on the relation between inputs violated.
class InputError : public Error {
 public:
  using Error::Error;
};

/// IDX files: wrong magic or header.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, long offset) : Error(what), offset_(offset) {}
  long offset() const { return offset_; }

 private:
  long offset_;
};

/// IDX files: payload shorter than the header claims.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// IDX files: image and label counts disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Invalid sweep configuration. `path` is a JSON pointer to the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string path)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace ddlab
