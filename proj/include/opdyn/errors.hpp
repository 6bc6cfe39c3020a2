#pragma once

#include <stdexcept>
#include <string>

namespace opdyn {

// Invalid parameters, malformed input files, bad configuration. CLI exit code 1.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN or other numerical breakdown inside the iteration. CLI exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by path-length operations on graphs that are not connected.
struct DisconnectedGraphError : InputError {
    DisconnectedGraphError(const std::string& msg, std::size_t components)
        : InputError(msg), n_components(components) {}
    std::size_t n_components;
};

} // namespace opdyn
