#pragma once

#include <stdexcept>
#include <string>

namespace sylv {

/// Shapes of two operands do not agree (non-square matrix, mixed point dimensions).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point set that had to be affinely independent was not.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (point not in polytope, 0 not interior, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A brute-force oracle or pipeline stage refused because a configured size limit would be exceeded.
class FeasibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two subdivisions could not be combined (mismatched interfaces, non-face intersections).
class CompatibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal certificate failed. Carries whatever context the raising stage had.
class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unsupported serialized input.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A serialized artifact written by an incompatible format version.
class UnsupportedVersionError : public ParseError {
public:
    using ParseError::ParseError;
};

} // namespace sylv
