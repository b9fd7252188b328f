#pragma once

#include <stdexcept>
#include <string>

namespace wiae {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor/graph shape mismatch; message names the offending operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An operation precondition was violated (non-scalar output, empty batch, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// A referenced tensor/node does not belong to the graph.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Not enough past samples to fill a sliding window.
class InsufficientHistoryError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value; message carries the key path.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input data (non-finite values, bad rows).
class DataError : public Error {
public:
    using Error::Error;
};

/// Textual input could not be parsed; message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid file with an irregular layout (e.g. uneven sampling).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Persisted file does not match the expected schema; message names the field.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Optimization failure; message carries epoch and parameter identity.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given inputs; message names the metric.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Sequence too degenerate for a statistic (all ties, length < 2).
class DegenerateSequenceError : public Error {
public:
    using Error::Error;
};

/// Sample below the asymptotic-regime threshold of a test.
class SmallSampleError : public Error {
public:
    using Error::Error;
};

/// Constant training split or similar unusable dataset.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

}  // namespace wiae
