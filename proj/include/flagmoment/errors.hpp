#pragma once
// Error taxonomy. Everything thrown by this library derives from
// flagmoment::error, split by who has to act on it: the caller fixed
// bad input, a document failed validation, or an iteration ran out of
// numerical road.

#include <stdexcept>
#include <string>

namespace flagmoment {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unusable input: unknown model name, bad parameters, malformed files,
/// vectors of the wrong length.
struct input_error : error {
    using error::error;
};

/// A model or report failed a structural self-check (orthonormality,
/// bracket closure, involution not a square root of the identity, ...).
struct validation_error : error {
    using error::error;
};

/// An iterative procedure (descent, closure, eigen-clustering) could not
/// reach its tolerance or exceeded a safety bound.
struct numerical_error : error {
    using error::error;
};

/// Mismatched ambient dimensions in subspace or polytope arithmetic.
struct dimension_error : input_error {
    using input_error::input_error;
};

} // namespace flagmoment
