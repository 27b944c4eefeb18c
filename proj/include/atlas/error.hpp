#pragma once

#include <stdexcept>
#include <string>

namespace atlas {

// Base error for everything raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an input file is missing, malformed, or violates the model
// invariants. Maps to exit code 2 in the CLI.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

}  // namespace atlas
