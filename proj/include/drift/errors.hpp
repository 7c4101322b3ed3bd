#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A generator was asked for a mesh above its size guard.
class SizeLimitError : public Error {
public:
    using Error::Error;
};

class InvalidGridError : public Error {
public:
    using Error::Error;
};

/// Malformed mesh or field input. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(message + " at line " + std::to_string(line)), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

/// Operator assembly refused (open mesh, bad potential, ...).
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// A numeric argument outside its documented domain.
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Eigensolver ran out of iterations. best_residual is the largest
/// residual among the requested pairs at the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, double best_residual)
        : Error(message), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// The first positive eigenvalue could not be separated from the zero mode.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// An eigenbasis does not represent the requested initial data.
class RepresentationError : public Error {
public:
    RepresentationError(const std::string& message, double residual)
        : Error(message), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Eigenvalue lower bound requested with a non-positive curvature constant.
class BoundUnavailableError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace drift
