#pragma once

#include <stdexcept>
#include <string>

namespace scoop {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document. `where()` is a JSON pointer or file:line location.
class ParseError : public Error {
public:
    ParseError(std::string where, std::string message)
        : Error(where.empty() ? message : where + ": " + message),
          where_(std::move(where)),
          message_(std::move(message)) {}
    const std::string& where() const noexcept { return where_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string where_;
    std::string message_;
};

/// Well-formed input that violates a domain or instance invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation precondition (e.g. stepping a terminal state).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Belief or planning failure: inconsistent evidence, state explosion, empty proposal.
class InferenceError : public Error {
public:
    using Error::Error;
};

} // namespace scoop
