#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semilinear {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad geometry, coefficients violating structural hypotheses,
/// nonlinearities violating (H2)/(H3), malformed configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Expression syntax error or unknown identifier. `offset` is a byte offset
/// into the parsed text.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t offset)
        : ValidationError(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Evaluation outside a function's real domain (log of nonpositive value,
/// division by zero, non-finite result, unbound variable).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A linear solve or factorization failed.
class SolveError : public Error {
public:
    using Error::Error;
};

/// An iteration did not reach its tolerance, or an invariant that should
/// hold along the iteration was violated numerically.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace semilinear
