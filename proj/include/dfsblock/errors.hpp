#pragma once

#include <stdexcept>
#include <string>

namespace dfsblock {

// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: out-of-range indices, malformed configs, unnormalized states.
struct ValidationError : Error {
  using Error::Error;
};

// Request exceeds a configured resource limit (qubit cap, dense cap, power cap).
struct CapacityError : Error {
  using Error::Error;
};

// Inputs violate a structural assumption of the model (non-commuting
// generators, coupling on a non-tunable edge, collinear control axes).
struct ModelError : Error {
  using Error::Error;
};

// A spectral gap entering a denominator is zero.
struct GapClosureError : ModelError {
  using ModelError::ModelError;
};

// Rotation-angle synthesis cannot work (unit angle is a rational multiple of pi).
struct SynthesisDegeneracyError : ModelError {
  using ModelError::ModelError;
};

// Step refinement failed to converge.
struct IntegrationError : Error {
  using Error::Error;
};

// A numerical contract was violated at runtime (leakage bound, unitarity
// defect, invariance precondition).
struct ContractViolation : Error {
  using Error::Error;
};

}  // namespace dfsblock
