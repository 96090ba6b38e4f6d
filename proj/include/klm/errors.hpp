#pragma once

#include <stdexcept>
#include <string>

namespace klm {

// Precondition and shape violations are reported as std::invalid_argument.
// The two types below carry the failure classes the CLI maps to exit codes.

/// Non-finite values or overflow inside a numerical kernel.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical parameters outside the regime where a model is meaningful.
class RegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace klm
