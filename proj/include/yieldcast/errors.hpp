#pragma once

#include <stdexcept>
#include <string>

namespace yieldcast {

/// Base class for all yieldcast errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- numeric errors ----

/// Matrix could not be Cholesky-factorized, even after jitter escalation.
struct NotPositiveDefinite : Error {
    using Error::Error;
};

/// Normal equations are singular: the design matrix does not have full column rank.
struct RankDeficient : Error {
    using Error::Error;
};

/// Objective returned NaN/Inf at the initial point of an optimization.
struct NonFiniteObjective : Error {
    using Error::Error;
};

// ---- data errors ----

struct MalformedHeader : Error {
    using Error::Error;
};

struct MalformedRow : Error {
    long line_number;
    MalformedRow(long line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}
};

struct EmptySeries : Error {
    using Error::Error;
};

struct OutOfRange : Error {
    using Error::Error;
};

// ---- model errors ----

struct GridMismatch : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// ---- backtest errors ----

struct EmptyRecords : Error {
    using Error::Error;
};

struct MismatchedRanges : Error {
    using Error::Error;
};

}  // namespace yieldcast
