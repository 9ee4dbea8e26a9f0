#pragma once

#include <stdexcept>
#include <string>

namespace lpconc {

/// Base class for every error raised by the library. Precondition violations,
/// malformed input files and degenerate data all surface as `Error`.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw Error(message);
    }
}

} // namespace detail
} // namespace lpconc
