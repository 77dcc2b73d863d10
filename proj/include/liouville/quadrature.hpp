#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include "liouville/common.hpp"

namespace liouville::quadrature {

// Algebraic decay of an integrand: |f(y)| <= C (1+|y|)^(-power).
struct DecayProfile {
  double power = 4.0;
  bool singular_origin = false;  // extra radial grading toward y = 0
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t cells_used = 0;
};

struct PlaneOptions {
  std::size_t max_cells = 400000;
  int angular_panels = 8;
  double max_radius = 1e12;
};

using PlaneFunction = std::function<double(Complex)>;
using RadialProfile = std::function<double(double)>;

// Adaptive integral over the whole plane. Polar cells with a tensor
// Gauss-Kronrod 7/15 rule, worst-error-first bisection (ties broken by cell
// index), geometric radial panels and an analytic tail beyond the outer radius.
// Throws QuadratureError carrying the partial value if tol is not reached.
QuadratureResult integrate_plane(const PlaneFunction& f, DecayProfile decay, double tol,
                                 const PlaneOptions& options = {});

// 2 pi * int_0^inf rho^(1+s) g(rho) d rho by one-dimensional double
// exponential quadrature. Independent of integrate_plane; used as its oracle.
double integrate_radial(const RadialProfile& g, double s, double tol = 1e-13);
std::pair<double, double> integrate_radial_with_error(const RadialProfile& g, double s,
                                                      double tol = 1e-13);

struct IdentityReport {
  double id1 = 0.0;           // log-weighted Z0 moment, expected -pi/(2 alpha)
  double id2 = 0.0;           // plain Z0 moment, expected 0
  double id3 = 0.0;           // squared real-part moment, expected pi/(12 alpha)
  double id3_imag = 0.0;      // squared imaginary-part moment, same value
  double quantization = 0.0;  // total bubble mass, expected 8 pi alpha
  double max_error_estimate = 0.0;
};

IdentityReport canonical_identities(int alpha, Complex xi, double tol = 1e-11);

// |int |y|^{2(alpha-1)} f(y^alpha) dy - (1/alpha) int f dy|.
// decay_power describes f itself.
double change_of_variables_check(const PlaneFunction& f, int alpha, double decay_power,
                                 double tol = 1e-11);

// Re- and Im-moments int |y|^{2(alpha-1)} f(y^alpha) Re/Im(y^gamma) dy.
// gamma must lie in 1..alpha-1.
std::pair<double, double> vanishing_moment_check(const PlaneFunction& f, int alpha, int gamma,
                                                 double decay_power, double tol = 1e-11);

}  // namespace liouville::quadrature
