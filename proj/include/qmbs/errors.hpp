#pragma once

#include <stdexcept>
#include <string>

namespace qmbs {

// Bad user-supplied parameters (dimensions, ranks, field β, parity).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input data that violates a structural precondition (e.g. non-Hermitian).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure did not produce a trustworthy answer.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ratio estimator whose denominator is statistically indistinguishable from zero.
struct UnstableEstimateError : NumericError {
    using NumericError::NumericError;
};

}  // namespace qmbs
