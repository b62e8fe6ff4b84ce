// Copyright (c) 2026 pnlab contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pnlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A shape, operator or solver parameter is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of a closed-form expression.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The grid does not cover the domain (or a stencil leaves the grid).
class CoverageError : public Error {
public:
    using Error::Error;
};

/// F_p was evaluated at a vanishing gradient; callers must use the envelopes.
class DegenerateGradientError : public Error {
public:
    using Error::Error;
};

/// Solver or run configuration is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A checkpoint file is malformed (bad magic, truncated, inconsistent header).
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace pnlab
