#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bifinf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `position` is a 0-based character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error(message + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Invalid arguments: dimension mismatches, bad indices, violated preconditions.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numeric routine could not produce a trustworthy answer.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace bifinf
