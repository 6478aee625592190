#pragma once

#include <stdexcept>
#include <string>

namespace gexp {

/// Malformed arguments: wrong dimensions, non-symmetric matrices, bad ranges.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A solver or experiment was configured in a way that cannot run
/// (CFL violation, non-monotone stencil, caps exceeded, missing assumptions).
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Query outside the truncated computational box.
class OutOfDomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Non-finite values or overflow produced during a computation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gexp
