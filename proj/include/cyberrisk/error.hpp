#pragma once

#include <stdexcept>
#include <string>

namespace cyberrisk {

/// Input or configuration rejected before any computation (CLI exit code 1).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a result (CLI exit code 2).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw ValidationError(message);
}

}  // namespace cyberrisk
