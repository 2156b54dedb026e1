#pragma once

#include <stdexcept>
#include <string>

namespace disttest {

// Mismatched vector lengths, invalid supports, malformed inputs.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// A routine was invoked outside the parameter regime it is specified for.
struct PreconditionError : std::invalid_argument {
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// File or serialization failures.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace disttest
