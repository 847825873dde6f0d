#pragma once

#include <stdexcept>
#include <string>

namespace qki {

// Base class for all toolkit errors. Subtypes are what callers (and the CLI
// exit-code mapping) dispatch on.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A label appears twice where labels must be unique.
struct DuplicateLabel : Error {
    using Error::Error;
};

// A requested label is not present in the state / operator.
struct UnknownLabel : Error {
    using Error::Error;
};

// Operator and state dimensions do not line up.
struct DimMismatch : Error {
    using Error::Error;
};

// Requested rank is outside [1, dim] or inconsistent with the data.
struct BadRank : Error {
    using Error::Error;
};

// Entropic expression groups share a label.
struct OverlappingGroups : Error {
    using Error::Error;
};

// A state (or operator) fails one of its declared invariants
// (hermiticity, positivity, trace, isometry, trace preservation).
struct InvariantViolation : Error {
    using Error::Error;
};

// Ensemble average state is singular where an inverse is required.
struct SingularAverage : Error {
    using Error::Error;
};

// Random center element failed to separate the algebra's central
// projections after the retry budget.
struct DegenerateCenterSplit : Error {
    using Error::Error;
};

// Synthesized block's conditional family failed to generate a full
// matrix algebra after the resample budget.
struct IrreducibilityFailure : Error {
    using Error::Error;
};

// A mandatory self-check on a computed result failed.
struct VerificationFailed : Error {
    using Error::Error;
};

// Requested computation exceeds the dense feasibility cap.
struct DimTooLarge : Error {
    using Error::Error;
};

// Optimizer found no ansatz meeting the fidelity constraint.
struct NoFeasiblePoint : Error {
    using Error::Error;
};

// An audited inequality came out more negative than the tolerance allows.
struct SlackViolation : Error {
    using Error::Error;
};

}  // namespace qki
