#pragma once

#include <stdexcept>
#include <string>

namespace prunedoc {

/// Base of every exception thrown by the library. The subclasses map onto
/// the failure classes the command-line tool turns into exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates its own declared shape (e.g. raster length mismatch).
class MalformedInputError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Incompatible parameters or mismatched component configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data is well-formed but cannot support the requested computation
/// (single-class training set, empty mask, no positives for AP).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// Operation not allowed in the object's current state.
class StateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

enum class ParseFailure {
    bad_magic,
    version_mismatch,
    truncated,
    invariant_violation,
    malformed,
};

const char* to_string(ParseFailure failure) noexcept;

/// Failure while decoding a persisted artifact (model file, token set).
class ParseError : public Error {
public:
    ParseError(ParseFailure failure, const std::string& what)
        : Error(std::string(to_string(failure)) + ": " + what), failure_(failure) {}

    [[nodiscard]] ParseFailure failure() const noexcept { return failure_; }

private:
    ParseFailure failure_;
};

}  // namespace prunedoc
