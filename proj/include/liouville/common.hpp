#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace liouville {

// Points of the plane are identified with complex numbers x = x1 + i x2.
using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr const char* version_string = "liouville 1.0.0";

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class PoleError : public Error {
public:
  using Error::Error;
};

class ConditioningError : public Error {
public:
  using Error::Error;
};

class ResolutionError : public Error {
public:
  using Error::Error;
};

class NearResonanceError : public Error {
public:
  NearResonanceError(const std::string& what, double smallest_singular_value)
      : Error(what), smallest_singular_value(smallest_singular_value) {}
  double smallest_singular_value;
};

class QuadratureError : public Error {
public:
  QuadratureError(const std::string& what, double partial_value, double error_estimate)
      : Error(what), partial_value(partial_value), error_estimate(error_estimate) {}
  double partial_value;
  double error_estimate;
};

class ContractionError : public Error {
public:
  ContractionError(const std::string& what, std::vector<double> history)
      : Error(what), history(std::move(history)) {}
  std::vector<double> history;  // H1 distances between successive iterates
};

// No degree evidence for a zero of the multiplier map in the search disk.
// scan rows are (b1, b2, c1, c2) over the sampled circle.
class RootNotFoundError : public Error {
public:
  RootNotFoundError(const std::string& what, std::vector<std::array<double, 4>> scan)
      : Error(what), scan(std::move(scan)) {}
  std::vector<std::array<double, 4>> scan;
};

class UsageError : public Error {
public:
  using Error::Error;
};

// x^k for integer k >= 0 without going through pow/log.
inline Complex ipow(Complex x, int k) {
  Complex r{1.0, 0.0};
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace liouville
