#pragma once

#include <stdexcept>
#include <string>

namespace exprlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shapes of vectors or matrices do not chain.
struct DimensionError : Error {
    using Error::Error;
};

// Malformed input files (JSON, CSV, key=value configs).
struct ParseError : Error {
    using Error::Error;
};

// A construction cannot be built within numeric or size limits.
struct InfeasibleError : Error {
    using Error::Error;
};

// Symbolic set growth exceeded the configured cap.
struct CapExceededError : Error {
    using Error::Error;
};

}  // namespace exprlab
