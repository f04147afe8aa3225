#pragma once

#include <stdexcept>
#include <string>

namespace opinn {

// Invalid parameters or shapes supplied by the caller.
class InvalidParameterError : public std::invalid_argument {
public:
    explicit InvalidParameterError(const std::string& msg)
        : std::invalid_argument(msg) {}
};

// Malformed or inconsistent on-disk data.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Divergence or non-convergence during numerical integration/training.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace opinn
