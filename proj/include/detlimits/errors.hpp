#pragma once

#include <stdexcept>
#include <string>

namespace detlimits {

// Raised when two objects defined over different sample spaces are combined.
class SpaceMismatchError : public std::invalid_argument {
 public:
  explicit SpaceMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data (files, records, scenario documents) that cannot be used.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace detlimits
