#pragma once

#include <stdexcept>
#include <string>

namespace ample {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point was queried against a domain that does not contain it.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its documented preconditions.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Invalid user input (configuration values, malformed files).
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical quadrature produced a non-finite or unusable value.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// The stopping-time construction broke one of its certified bounds.
class ConstructionViolation : public Error {
public:
    using Error::Error;
};

/// The requested combination (dimension, domain kind) is not implemented.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// No corkscrew point exists at the requested constant; carries the best one found.
class CorkscrewError : public Error {
public:
    CorkscrewError(const std::string& what, double achievable)
        : Error(what), achievable_(achievable) {}
    double achievable() const { return achievable_; }

private:
    double achievable_;
};

} // namespace ample
