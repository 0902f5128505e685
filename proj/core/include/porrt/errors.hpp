#pragma once

#include <stdexcept>
#include <string>

namespace porrt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (non-unit quaternion, bad weights, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Scenario or model configuration cannot be used as given.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Push direction cannot be computed because source and target coincide.
class DegenerateDirectionError : public Error {
public:
    using Error::Error;
};

/// Observation has zero probability under the current belief.
class InconsistentObservationError : public Error {
public:
    using Error::Error;
};

/// Every particle received zero likelihood.
class DegenerateFilterError : public Error {
public:
    using Error::Error;
};

/// KL divergence is infinite: b_i has mass where b_j has none.
class OutOfSupportError : public Error {
public:
    using Error::Error;
};

/// Exact solver exceeded its node budget.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Mismatched state/action/observation spaces.
class ModelError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

/// Unreadable or malformed input file.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace porrt
