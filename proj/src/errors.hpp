#pragma once

#include <stdexcept>
#include <string>

namespace ureca {

// Error taxonomy mirrored 1:1 by the C API status codes.
struct InvalidArgument : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HttpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ureca
