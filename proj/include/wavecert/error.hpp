#pragma once

#include <stdexcept>
#include <string>

namespace wavecert {

/// Raised when an argument lies outside the domain where a formula is defined
/// (negative weight base, r = 0 in a 1/r term, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an operation's stated precondition is violated by the caller.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on non-finite input data; carries the offending location.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (first bad index " + std::to_string(index) + ")"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

} // namespace wavecert
