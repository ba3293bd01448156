#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zhat {

/// Input outside the mathematical domain of an operation (rho(0), s <= 1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An enumeration or search would exceed its configured budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation requires an EXACT residue image but got a truncated one.
class ModeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed set expression, supernatural literal or polynomial.
class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& what, std::size_t position, std::string expected = {})
        : std::invalid_argument(what + " at position " + std::to_string(position) +
                                (expected.empty() ? std::string{} : " (expected " + expected + ")")),
          position_(position), expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

} // namespace zhat
