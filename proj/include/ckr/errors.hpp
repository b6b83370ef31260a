#pragma once

#include <stdexcept>
#include <string>

namespace ckr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or non-finite input parameter; message names the offending field.
struct ParamError : Error {
    using Error::Error;
};

// Fixed-point iteration failed to contract within max_iter.
struct SolverError : Error {
    SolverError(const std::string& msg, double residual_, int iterations_)
        : Error(msg), residual(residual_), iterations(iterations_) {}
    double residual;
    int iterations;
};

// Transmission sample outside the range reachable on the operating flank.
struct SignalRangeError : Error {
    using Error::Error;
};

// Sample implies cos^2 outside [0,1] beyond the clamp band.
struct InconsistentSignalError : Error {
    using Error::Error;
};

struct SizeError : Error {
    using Error::Error;
};

struct AlignmentError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace ckr
