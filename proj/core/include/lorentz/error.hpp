#pragma once

#include <stdexcept>
#include <string>

namespace lorentz {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Closed-form asked for outside the range where it is known to hold.
class ValidityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Enumeration would touch more coefficient cells than allowed.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Interpolation table queried outside the range it was built on.
class CoverageError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// An iterative method gave up before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lorentz
