#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ctxlqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Problem sizes shared by every module: the state/action dimensions of the
/// controlled system and the row counts of the two context matrices.
struct Dimensions {
    int state = 0;       // state vector length
    int action = 0;      // action vector length
    int state_ctx = 0;   // rows of the state-context matrix C
    int action_ctx = 0;  // rows of the action-context matrix D

    int features() const { return state_ctx + action_ctx; }
    bool valid() const {
        return state >= 1 && action >= 1 && state_ctx >= 1 && action_ctx >= 1;
    }
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

/// A linear solve or factorization failed (e.g. an ill-conditioned
/// R + B'PB block in the backward recursion).
struct NumericalFailure : Error {
    using Error::Error;
};

struct StageOutOfRange : Error {
    using Error::Error;
};

/// Every optimistic candidate violated the value-matrix norm cap.
struct NoFeasibleCandidate : Error {
    using Error::Error;
};

struct EmptyHistory : Error {
    using Error::Error;
};

struct NonpositiveMass : Error {
    using Error::Error;
};

struct UnknownKind : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace ctxlqr
