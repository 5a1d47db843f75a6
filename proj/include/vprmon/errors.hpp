#pragma once

#include <stdexcept>
#include <string>

namespace vprmon {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration or argument values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// File system and stream failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset content; messages name the first offending row.
class LoadError : public IoError {
public:
    using IoError::IoError;
};

/// Model file problems: bad magic, version mismatch, checksum failure.
class ModelIoError : public IoError {
public:
    using IoError::IoError;
};

/// Training cannot proceed (e.g. single-class dataset).
class TrainError : public Error {
public:
    using Error::Error;
};

}  // namespace vprmon
