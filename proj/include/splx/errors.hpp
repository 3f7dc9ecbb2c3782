#pragma once

#include <stdexcept>
#include <string>

namespace splx {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A simplex lists the same vertex twice.
struct DuplicateVertexError : Error {
    using Error::Error;
};

/// The same simplex appears twice in one input order.
struct DuplicateSimplexError : Error {
    using Error::Error;
};

/// Complex construction received no simplices at all.
struct EmptyComplexError : Error {
    using Error::Error;
};

/// Requested order k lies outside what the complex supports.
struct OrderOutOfRangeError : Error {
    using Error::Error;
};

/// Operand shapes are incompatible.
struct DimensionMismatchError : Error {
    using Error::Error;
};

/// An iterative numerical routine failed to converge.
struct ConvergenceError : Error {
    using Error::Error;
};

/// A masked reduction was asked for with no selected entries.
struct EmptyMaskError : Error {
    using Error::Error;
};

/// A class label falls outside the configured number of classes.
struct LabelOutOfRangeError : Error {
    using Error::Error;
};

/// backward() was called without a matching recorded forward pass.
struct StaleTapeError : Error {
    using Error::Error;
};

/// A rate or fraction parameter lies outside its valid interval.
struct RateOutOfRangeError : Error {
    using Error::Error;
};

/// Input text could not be parsed into the expected structure.
struct ParseError : Error {
    using Error::Error;
};

/// A file declares a schema version this build does not understand.
struct SchemaVersionError : Error {
    using Error::Error;
};

/// CLI or config usage error (bad flags, missing arguments).
struct UsageError : Error {
    using Error::Error;
};

} // namespace splx
