#pragma once

#include <stdexcept>
#include <string>

namespace mcbound {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Malformed field-spec or network document; the message names the offending JSON path.
class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class RefinementFailure : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class SingularStep : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class JunctionNotFound : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

/// Edge data that no valid root set can produce.
class InternalConsistency : public Error {
public:
    using Error::Error;
};

class NotWatertight : public Error {
public:
    using Error::Error;
};

} // namespace mcbound
