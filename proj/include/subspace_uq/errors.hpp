#pragma once

#include <stdexcept>
#include <string>

namespace subspace_uq {

// Thrown when the noise spectral norm violates the series convergence gate
// ||X|| < lambda_r / 2. Carries both norms so callers can report them.
class SnrGateError : public std::runtime_error {
 public:
  SnrGateError(double noise_norm, double lambda_r)
      : std::runtime_error("snr gate violated: ||X|| = " +
                           std::to_string(noise_norm) +
                           " >= lambda_r/2 = " + std::to_string(lambda_r / 2)),
        noise_norm_(noise_norm),
        lambda_r_(lambda_r) {}

  double noise_norm() const { return noise_norm_; }
  double lambda_r() const { return lambda_r_; }

 private:
  double noise_norm_;
  double lambda_r_;
};

// Numerical routine failed to converge (e.g. SVD backend reported an error).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An exact integer identity that the library relies on failed to verify.
// This is build-breaking: it means the combinatorial layer is wrong.
class ConsistencyError : public std::logic_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

// A Monte-Carlo experiment had to abort (e.g. too many replicate failures).
class ExperimentError : public std::runtime_error {
 public:
  explicit ExperimentError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace subspace_uq
