#pragma once

#include <stdexcept>
#include <string>

namespace covertkey {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Two distributions were combined but their supports differ (symbols or order).
class SupportMismatch : public Error {
public:
    using Error::Error;
};

/// p(x) > 0 where q(x) = 0. Raised instead of returning +inf so modeling
/// mistakes surface at the call site.
class AbsoluteContinuityViolation : public Error {
public:
    using Error::Error;
};

/// Scalar argument outside its documented range.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Axis groups passed to mutual_information are not disjoint.
class AxisOverlap : public Error {
public:
    using Error::Error;
};

/// Exact convolution would exceed the configured atom cap.
class Overflow : public Error {
public:
    Overflow(const std::string& what, std::size_t required)
        : Error(what), required_atoms(required) {}
    std::size_t required_atoms;
};

/// chi(rho) == 0, so kappa and the rate corners are undefined.
class DegenerateChannel : public Error {
public:
    using Error::Error;
};

/// Integer rounding broke one of the plan's subset constraints.
class InfeasiblePlan : public Error {
public:
    using Error::Error;
};

/// Every corner of a region sweep collapsed to the origin.
class EmptyRegion : public Error {
public:
    using Error::Error;
};

/// Exact enumeration refused: term count above budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, double required)
        : Error(what), required_terms(required) {}
    double required_terms;
};

}  // namespace covertkey
