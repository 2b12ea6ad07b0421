// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ucmc {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Camera projection matrix is singular or its extrinsics are invalid.
class SingularProjection : public Error {
public:
    using Error::Error;
};

/// A pixel or ground point maps to the horizon (scale factor vanishes).
class PointAtInfinity : public Error {
public:
    using Error::Error;
};

/// Non-positive bounding-box dimensions or noise factor.
class InvalidDimension : public Error {
public:
    using Error::Error;
};

/// Innovation covariance is singular; the pair cannot be scored.
class DegenerateInnovation : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the offending line number (0 = whole file).
class ParseError : public Error {
public:
    ParseError(std::string reason, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + reason : reason),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Frames fed to the tracker out of order.
class FrameOrderError : public Error {
public:
    using Error::Error;
};

/// Synthetic scenario cannot keep its targets visible.
class FrustumError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while reading or writing.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ucmc
