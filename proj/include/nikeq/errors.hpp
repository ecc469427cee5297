#pragma once
#include <stdexcept>
#include <string>

namespace nikeq {

// Two families: bad input (CLI exit 2) and numerical trouble (CLI exit 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool is_input_error() const { return false; }
};

class InputError : public Error {
public:
    using Error::Error;
    bool is_input_error() const override { return true; }
};

class RegionError : public InputError {
public:
    RegionError(const std::string& boundary, const std::string& msg)
        : InputError(msg), boundary_(boundary) {}
    const std::string& boundary() const { return boundary_; }
private:
    std::string boundary_;
};

class ConstraintViolation : public InputError {
public:
    using InputError::InputError;
};

class DomainError : public Error { using Error::Error; };
class DegeneracyError : public Error { using Error::Error; };
class ConsistencyError : public Error { using Error::Error; };
class PrecisionError : public Error { using Error::Error; };
class TruncationError : public Error { using Error::Error; };
class SearchWindowError : public Error { using Error::Error; };
class WindowError : public Error { using Error::Error; };

// Carries the last estimate so callers can decide what to do with it.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double last_estimate, double last_error)
        : Error(msg), estimate_(last_estimate), error_(last_error) {}
    double last_estimate() const { return estimate_; }
    double last_error() const { return error_; }
private:
    double estimate_;
    double error_;
};

}  // namespace nikeq
