#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dampwave {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: a precondition or a domain invariant was violated.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A numerical kernel failed (non-convergence, singular system, floor hit).
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace dampwave
