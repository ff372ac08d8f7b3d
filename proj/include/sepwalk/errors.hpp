// errors.hpp -- exception taxonomy shared by all sepwalk components.
#pragma once

#include <stdexcept>
#include <string>

namespace sepwalk {

// Bad model or scenario parameters (out-of-range probabilities, rates, ...).
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Value outside its admissible range; message names the offending field.
struct RangeError : ParamError {
    using ParamError::ParamError;
};

// alpha or beta sits on {0,1} without the explicit allow_degenerate opt-in.
struct EllipticityError : ParamError {
    using ParamError::ParamError;
};

// Function argument outside its mathematical domain (e.g. negative scale index).
struct DomainError : ParamError {
    using ParamError::ParamError;
};

// Config file problems: missing key, unparsable value. Message names the key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A query touched sites outside the tracked extent, or the walker left it.
struct WindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation asked of a backend that cannot provide it (e.g. label queries
// on a backend that does not carry labels).
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A forward check was asked to look past the recorded trajectory.
struct HorizonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A potential was queried outside the sites it was built on.
struct SpanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A file could not be opened, read, or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Estimators demanded more data than the caller supplied.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientRecords : InsufficientData {
    using InsufficientData::InsufficientData;
};

// No regeneration point survived its forward checks. Diagnostic rather than
// fatal; callers that tolerate an empty result catch it.
struct NoRenewalFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sepwalk
