#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crossproj {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument or data structure violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Index outside the valid range of a container.
class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Malformed, truncated or unsupported file content.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    /// 1-based line number for text formats, 0 when not applicable.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace crossproj
