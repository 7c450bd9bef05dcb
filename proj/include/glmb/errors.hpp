#pragma once

#include <stdexcept>
#include <string>

namespace glmb {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A density with no components where at least one is required.
struct EmptyDensityError : Error {
    using Error::Error;
};

/// Numerical integration did not reach the requested tolerance
/// within its evaluation budget.
struct IntegrationFailureError : Error {
    using Error::Error;
};

/// Operands live on state spaces of different dimension.
struct DimensionMismatchError : Error {
    using Error::Error;
};

/// Operands carry different hyper-volume units.
struct UnitMismatchError : Error {
    using Error::Error;
};

/// Birth labels collide with labels already present in the prior.
struct LabelClashError : Error {
    using Error::Error;
};

/// Problem size exceeds the documented limits of an exhaustive routine.
struct TooLargeError : Error {
    using Error::Error;
};

/// Action selection was invoked with an empty action space.
struct NoActionsError : Error {
    using Error::Error;
};

/// A scenario or tool configuration failed validation.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace glmb
