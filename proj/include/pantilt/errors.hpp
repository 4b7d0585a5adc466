#pragma once

#include <stdexcept>
#include <string>

namespace pantilt {

// Base for all library errors so callers can catch everything in one place.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A runtime value violated an operation's precondition (non-finite input,
// negative distance, dt <= 0, PWM outside the convertible range, ...).
struct DomainError : Error {
    using Error::Error;
};

// Tensor/matrix dimensions do not line up.
struct ShapeError : Error {
    using Error::Error;
};

// A configuration struct violates its invariants (bad camera FOV, PWM limits
// out of order, head count not dividing the model dimension, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Input text could not be parsed; the message carries line/column context.
struct ParseError : Error {
    using Error::Error;
};

} // namespace pantilt
