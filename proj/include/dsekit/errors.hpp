#pragma once

#include <stdexcept>
#include <string>

namespace dsekit {

// Dimension/shape violations on any public op.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A Cholesky rank-1 downdate drove a pivot negative: the implied matrix
// lost positive semidefiniteness and no factor exists.
struct DowndateBrokePsd : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Innovation covariance (or a square-root analog) is singular to working
// precision; no gain can be formed.
struct SingularInnovation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The projection repair returned a matrix that still fails factorization.
struct UnrepairablePsd : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A covariance lost positive semidefiniteness under a baseline that has no
// stabilizer: the estimation cannot continue. Carries where it happened so
// a runner can log the event even though the step's outputs are gone.
struct PsdFailureHalt : std::runtime_error {
  using std::runtime_error::runtime_error;
  double min_eig_before = 0.0;
  bool at_predicted_cov = false;  // false: the prior covariance failed
};

// Scale parameters out of range (n + lambda <= 0, negative noise variance...).
struct NonPositiveScale : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Load-block elimination hit a numerically singular interior block.
struct SingularLoadBlock : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fixed-point search for a steady state failed to converge.
struct EquilibriumNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Steady-state input construction requires every rotor at rated speed.
struct NotAtRatedSpeed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A trajectory left the numerically representable regime.
struct SimulationBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An input file failed to parse or validate; the message names the field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dsekit
