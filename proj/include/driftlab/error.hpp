#pragma once

#include <stdexcept>
#include <string>

namespace driftlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value (negative alpha, unsupported dimension, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Arrays or fields with incompatible dimensions or bases.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite state or drift value during path simulation.
class SimulationError : public Error {
public:
    using Error::Error;
};

/// Input violates an analytic precondition (e.g. PDE solvability).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Linear algebra breakdown or insufficient resolution.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Too few samples for a requested statistic.
class StatisticsError : public Error {
public:
    using Error::Error;
};

/// Malformed, truncated or unreadable artifact files.
class IoError : public Error {
public:
    using Error::Error;
};

/// Artifact file with a bad header; distinct from plain I/O failure.
class FormatError : public IoError {
public:
    using IoError::IoError;
};

} // namespace driftlab
