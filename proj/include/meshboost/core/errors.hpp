#pragma once

#include <stdexcept>
#include <string>

namespace meshboost {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (OBJ, PNG, config). Carries a line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = -1)
        : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// File system failures: unreadable, unwritable, missing referenced files.
class IoError : public Error {
public:
    using Error::Error;
};

// Referenced texture image could not be found. Distinct from ParseError so
// callers can tell a bad OBJ from a missing sidecar file.
class MissingTextureError : public IoError {
public:
    using IoError::IoError;
};

// Tensor/layer shape disagreement. Message names both shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Out-of-range or inconsistent arguments.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Non-finite values or diverging optimization.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Weight files: bad magic, bad version, architecture mismatch, truncation.
class ModelError : public Error {
public:
    using Error::Error;
};

} // namespace meshboost
