#pragma once

#include <stdexcept>
#include <string>

namespace stgmvp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file: message names the offending row and column.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input violates a documented precondition (dimensions, ranges, counts).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Operation called in a state it does not accept (e.g. demeaning twice).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Data that makes a formula undefined, such as a zero demeaned sample.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// Factorization or root-bracketing failure.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration did not reach tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double last_residual, int iterations)
        : Error(what), last_residual_(last_residual), iterations_(iterations) {}

    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

/// Rethrows the exception being handled with `prefix` prepended to its
/// message, keeping its library error type. Call only inside a catch block.
[[noreturn]] inline void rethrow_with_context(const std::string& prefix) {
    try {
        throw;
    } catch (const SolverError& e) {
        throw SolverError(prefix + e.what(), e.last_residual(), e.iterations());
    } catch (const DegenerateDataError& e) {
        throw DegenerateDataError(prefix + e.what());
    } catch (const NumericError& e) {
        throw NumericError(prefix + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(prefix + e.what());
    } catch (const UsageError& e) {
        throw UsageError(prefix + e.what());
    } catch (const ParseError& e) {
        throw ParseError(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

}  // namespace stgmvp
