// Shared numeric aliases and error types.
#pragma once

#include <stdexcept>
#include <string>
#include <complex>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cftmps {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Complex = std::complex<double>;

/// Invalid input data (bad algebra, non-integrable weight, forbidden fusion, ...).
/// CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A computation stepped past an explicit cutoff. Never silently truncated.
struct RangeError : std::runtime_error {
  explicit RangeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An iterative method failed its convergence test. CLI maps this to exit code 3.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double to_double(const Rational& r) {
  return r.convert_to<double>();
}

/// 2j as a plain int for a (half-)integral weight value j
inline int twice_int(const Rational& j) {
  Rational two = j * 2;
  if (denominator(two) != 1) throw ValidationError("twice_int: value is not half-integral");
  return numerator(two).convert_to<int>();
}

}  // namespace cftmps
