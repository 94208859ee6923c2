#pragma once

#include <stdexcept>
#include <string>

namespace lincov {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct InvalidDimension : Error {
    using Error::Error;
};
struct LinearlyDependentBasis : Error {
    using Error::Error;
};
struct NonOrthogonalG0 : Error {
    using Error::Error;
};
struct InvalidTree : Error {
    using Error::Error;
};
struct DegenerateModel : Error {
    using Error::Error;
};
struct NotPositiveDefinite : Error {
    using Error::Error;
};
struct UnsupportedModel : Error {
    using Error::Error;
};
struct InvalidAnchor : Error {
    using Error::Error;
};
struct SingularSample : Error {
    using Error::Error;
};
struct InvalidRange : Error {
    using Error::Error;
};
struct HypothesisViolated : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

}  // namespace lincov
