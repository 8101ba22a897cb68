#pragma once

// Exception hierarchy shared by every dphav module.

#include <stdexcept>

namespace dphav {

/// Base class for all library failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The Fock-space truncation cannot represent the requested state.
struct TruncationError : Error {
    using Error::Error;
};

/// An iterative numerical procedure failed to converge or lost validity.
struct NumericalError : Error {
    using Error::Error;
};

/// The inputs lie outside the domain of the requested quantity.
struct DomainError : Error {
    using Error::Error;
};

}  // namespace dphav
