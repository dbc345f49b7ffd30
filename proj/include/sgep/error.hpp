#pragma once

#include <stdexcept>
#include <string>

namespace sgep {

// Shape or size mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Invalid parameter value (tolerance out of range, empty input, ...).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not produce a meaningful result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

} // namespace sgep
