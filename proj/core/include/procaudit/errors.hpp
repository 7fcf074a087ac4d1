#pragma once

#include <stdexcept>
#include <string>

namespace procaudit {

// Base for every error the library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument or violated precondition (empty input, k > n, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// Operand dimensions do not line up.
struct ShapeError : ArgumentError {
    using ArgumentError::ArgumentError;
};

// CSV header does not match the interchange contract.
struct SchemaError : Error {
    using Error::Error;
};

// A cell or token could not be parsed; message carries row/column.
struct ParseError : Error {
    using Error::Error;
};

// Parsed fine but violates a data invariant (negative price, single-class
// balance input, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Persisted container (stats file, model file) is corrupt, truncated or of an
// unsupported version.
struct FormatError : Error {
    using Error::Error;
};

// A computation produced NaN/Inf.
struct NumericError : Error {
    using Error::Error;
};

// Fold assignment could not cover every class in every training split.
struct StratificationError : Error {
    using Error::Error;
};

// File could not be opened, read or written.
struct IoError : Error {
    using Error::Error;
};

} // namespace procaudit
