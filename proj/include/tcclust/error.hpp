#pragma once

#include <stdexcept>
#include <string>

namespace tcclust {

/// Base class for all tcclust errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input violated a documented precondition or invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// A file could not be parsed; message names the offending coordinate.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Model fitting failed beyond recovery (e.g. every EM restart collapsed).
class FitError : public Error {
public:
    explicit FitError(const std::string& msg) : Error(msg) {}
};

} // namespace tcclust
