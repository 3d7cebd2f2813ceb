#pragma once

#include <stdexcept>
#include <string>

namespace anomid {

// Base for every error raised by the library. The CLI maps each of these to a
// non-zero exit code and a one-line diagnostic.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A source model that cannot produce finite positive KL numbers.
class InvalidModel : public Error {
public:
    using Error::Error;
};

// Arguments outside an operation's domain (kappa > |L|, k1 + k2 > M, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// User configuration that is well-formed but unusable (C_p too large, bad key).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Sampling probabilities that break the per-instant budget.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

// A root-finder or similar internal consistency check failed.
class SolverError : public Error {
public:
    using Error::Error;
};

// A trial reached the step horizon without stopping.
class TruncatedTrial : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

}  // namespace anomid
