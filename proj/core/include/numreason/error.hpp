#pragma once

#include <stdexcept>
#include <string>

namespace numreason {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input files (datasets, candidate files, ranking artifacts) that are
/// malformed or violate their schema.
class DataError : public Error {
public:
  using Error::Error;
};

class IndexError : public Error {
public:
  using Error::Error;
};

}  // namespace numreason
