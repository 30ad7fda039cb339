#pragma once

#include <stdexcept>
#include <string>

namespace collprob {

/// Base class for all collprob errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A matrix required to be positive semi-definite has a negative eigenvalue.
struct NonPsdError : Error {
    using Error::Error;
};

/// A matrix inversion was requested on a (near-)singular matrix.
struct SingularError : Error {
    using Error::Error;
};

/// A covariance with eigenvalues below the standardization threshold.
struct SingularCovarianceError : SingularError {
    using SingularError::SingularError;
};

struct LengthMismatchError : Error {
    using Error::Error;
};

struct TimeMismatchError : Error {
    using Error::Error;
};

struct InvalidParamsError : Error {
    using Error::Error;
};

struct EmptyTrajectoryError : Error {
    using Error::Error;
};

/// Scenario file could not be parsed at all (malformed JSON, wrong types).
struct ParseError : Error {
    using Error::Error;
};

/// Scenario parsed but failed semantic validation; message names the field.
struct ValidationError : Error {
    using Error::Error;
};

struct InvalidSpecError : Error {
    using Error::Error;
};

}  // namespace collprob
