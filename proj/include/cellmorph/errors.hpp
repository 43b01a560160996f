#pragma once

#include <stdexcept>
#include <string>

namespace cellmorph {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidScaleError : public Error {
public:
    using Error::Error;
};

/// Unreadable file, unsupported format or bit depth, malformed header.
class MaskFormatError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

/// A label id requested from a mask that does not contain it.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Invalid geometric input: no seeds, duplicates, out-of-bounds seeds,
/// degenerate polygons.
class GeometryError : public Error {
public:
    using Error::Error;
};

class StatsError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public StatsError {
public:
    using StatsError::StatsError;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Configuration problem. `key()` names the offending key when there is one.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace cellmorph
