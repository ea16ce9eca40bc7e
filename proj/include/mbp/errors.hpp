#pragma once

#include <stdexcept>
#include <string>

namespace mbp {

/// A law violates one of the structural invariants (signs, conservativeness).
struct InvalidLaw : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An iteration (root finder, ODE step control) exhausted its budget.
struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two routes to the same quantity disagree beyond the documented bound.
struct ToleranceNotMet : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation called on a law of the wrong criticality class.
struct NotApplicable : std::logic_error {
    using std::logic_error::logic_error;
};

/// Evaluation at a point where the expression degenerates (e.g. f(s) = 0).
struct SingularPoint : std::domain_error {
    using std::domain_error::domain_error;
};

/// Conditioning event numerically null.
struct DegenerateCondition : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfiniteMoment : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A q-matrix row tail cannot be bounded within the window budget.
struct RateOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mbp
