#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypofbi {

enum class ErrorCode {
    Syntax,          // malformed expression text
    UnknownIdentifier,
    BadExponent,
    DivisionByZero,
    Domain,          // point outside the declared box
    InvalidArgument, // violated precondition on plain inputs
    Singular,        // Jacobian determinant below threshold
    BranchCut,       // bracket undefined
    Overflow,        // exponent real part above the double-precision limit
    Undersampled,    // oscillation not resolved by the quadrature grid
    FitFailure,
    NotASolution,    // propagation gate
    EmptyFiber,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `offset()` is the byte offset into
/// the source expression for parse/evaluation errors and -1 otherwise.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, long offset = -1)
        : std::runtime_error(what), code_(code), offset_(offset) {}

    ErrorCode code() const noexcept { return code_; }
    long offset() const noexcept { return offset_; }

private:
    ErrorCode code_;
    long offset_;
};

} // namespace hypofbi
