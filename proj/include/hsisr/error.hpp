#pragma once

#include <stdexcept>
#include <string>

namespace hsisr {

/// Input failed a documented precondition (bad shape, bad config value, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training diverged (non-finite loss or parameter).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hsisr
