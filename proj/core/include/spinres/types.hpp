#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinres {

using cplx = std::complex<double>;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

// Dense eigendecompositions are refused above this Hilbert-space dimension.
inline constexpr int kDenseDimCap = 4096;

// Error hierarchy mirrors the CLI exit codes: validation problems (bad
// arguments, malformed input) exit 2, numerical failures (singular
// conditioning, non-convergence) exit 3, capability limits exit 4.
class Error : public std::runtime_error {
public:
  Error(std::string msg, int exit_code)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

private:
  int exit_code_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg, 2) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg) : Error(msg, 3) {}
};

class CapabilityError : public Error {
public:
  explicit CapabilityError(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace spinres
