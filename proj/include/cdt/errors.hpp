#pragma once

#include <stdexcept>
#include <string>

namespace cdt {

// Malformed input, inconsistent dimensions, or invalid parameters.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver produced a non-finite objective or gradient.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cdt
