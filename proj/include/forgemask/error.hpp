#pragma once

#include <stdexcept>
#include <string>

namespace forgemask {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class ParameterError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

/// Malformed PNG/JPEG stream. `format()` is "PNG", "JPEG" or "unknown".
class DecodeError : public Error {
public:
    DecodeError(std::string format, const std::string& what)
        : Error(format + " decode error: " + what), format_(std::move(format)) {}
    const std::string& format() const noexcept { return format_; }

private:
    std::string format_;
};

class EncodeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed FMAP feature file.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace forgemask
