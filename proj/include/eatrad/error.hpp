#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eatrad {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file content. `offset()` is the byte where decoding failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class TruncationError : public Error {
public:
    TruncationError(std::size_t expected, std::size_t actual)
        : Error("truncated payload: expected " + std::to_string(expected) + " bytes, found " +
                std::to_string(actual)),
          expected_(expected), actual_(actual) {}
    [[nodiscard]] std::size_t expected() const noexcept { return expected_; }
    [[nodiscard]] std::size_t actual() const noexcept { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Two grids that must coincide (volume/mask, mask/mask) do not.
class AlignmentError : public Error {
public:
    using Error::Error;
};

class EmptyRegionError : public Error {
public:
    using Error::Error;
};

/// Invalid phantom or pipeline specification.
class SpecError : public Error {
public:
    using Error::Error;
};

/// A feature vector or table does not match a model's manifest.
class ManifestError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Bad configuration or command-line input (CLI exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace eatrad
