#pragma once

#include <stdexcept>
#include <string>

namespace probenorm {

// Bad arguments: non-finite coordinates, empty training sets, malformed
// search spaces, out-of-range configuration values.
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure with context, e.g. a Gram matrix that stays
// non-positive-definite after jitter escalation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The probe axis does not press into the surface (grazing or pointing away),
// or a mesh query found no surface under the probe.
class NoContactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The force-objective denominator crossed its singularity guard.
class DegenerateObjectiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files (mesh or bench spec); messages carry line numbers.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace probenorm
