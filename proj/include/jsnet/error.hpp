#pragma once

#include <stdexcept>
#include <string>

namespace jsnet {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimensions or counts violate an operation's preconditions.
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// A parameter value outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A construction request that cannot be satisfied (e.g. regular graph parity).
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// A linear system that cannot be solved (rank deficient or singular).
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A plot asks for a series that the data does not contain.
class MissingSeries : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class E = InvalidDimension>
inline void require(bool ok, const std::string& what) {
  if (!ok) throw E(what);
}

}  // namespace detail
}  // namespace jsnet
