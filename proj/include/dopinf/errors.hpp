#pragma once

#include <stdexcept>
#include <string>

namespace dopinf {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or unreadable snapshot container / artifact file.
class DataFormatError : public Error {
public:
    using Error::Error;
};

/// Invalid row or work partition request (p < 1, p > nx, plan mismatch).
class PartitionError : public Error {
public:
    using Error::Error;
};

/// Broken collective contract: shape mismatch, bad owner rank, timeout,
/// or a peer rank aborting mid-collective.
class CollectiveError : public Error {
public:
    using Error::Error;
};

/// A state variable is constant in time, so max-abs scaling is undefined.
class DegenerateVariableError : public Error {
public:
    using Error::Error;
};

/// Gram matrix has an eigenvalue below the negative clamp threshold.
class NotPsdError : public Error {
public:
    using Error::Error;
};

/// Requested reduced dimension exceeds the numerical rank of the data.
class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

/// Dense linear solve or eigendecomposition failure.
class SolveError : public Error {
public:
    using Error::Error;
};

/// Every candidate regularization pair was rejected.
class NoAdmissiblePairError : public Error {
public:
    using Error::Error;
};

/// Bad configuration file or CLI arguments.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Generic precondition violation.
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace dopinf
