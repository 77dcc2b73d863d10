#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "liouville/common.hpp"
#include "vendor_json.hpp"

namespace liouville::geometry {

// Smooth star-shaped boundary x(t) = r(t) e^{it}, t in [0, 2 pi).
class BoundaryCurve {
public:
  // r(t) = cos_coeffs[0] + sum_k cos_coeffs[k] cos(k t) + sin_coeffs[k] sin(k t).
  // sin_coeffs[0] is ignored.
  static BoundaryCurve fourier(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);
  static BoundaryCurve ellipse(double semi_axis_x, double semi_axis_y);

  double radius(double t) const;
  double radius_d1(double t) const;
  double radius_d2(double t) const;

  Complex point(double t) const { return std::polar(radius(t), t); }
  Complex tangent(double t) const;  // dx/dt
  double curvature(double t) const;  // signed, positive for convex

  const std::vector<double>& cos_coeffs() const { return cos_; }
  const std::vector<double>& sin_coeffs() const { return sin_; }
  bool is_ellipse() const { return ellipse_; }

private:
  std::vector<double> cos_, sin_;
  bool ellipse_ = false;
  double ax_ = 1.0, ay_ = 1.0;
};

enum class DomainKind { unit_disk, scaled_disk, curve };

class HarmonicExtension;

// Planar domain containing 0 with its Dirichlet Green's function.
class DomainModel {
public:
  static DomainModel unit_disk();
  static DomainModel scaled_disk(double radius);
  // Throws ArgumentError if r <= 0 somewhere or a declared symmetry fails.
  static DomainModel curve(BoundaryCurve curve, std::optional<int> symmetry_order = std::nullopt,
                           int boundary_nodes = 256);

  DomainKind kind() const;
  std::optional<int> symmetry_order() const;
  const BoundaryCurve& boundary() const;
  double disk_radius() const;  // radius for disk kinds

  double boundary_radius(double theta) const;
  Complex boundary_point(double theta) const { return std::polar(boundary_radius(theta), theta); }
  double min_boundary_radius() const;
  // |x| / r(arg x): < 1 inside, = 1 on the boundary.
  double radial_fraction(Complex x) const;
  bool contains(Complex x) const { return radial_fraction(x) < 1.0; }

  // G(x,p) for the Dirichlet Laplacian: -Delta_x G = delta_p, G = 0 on the boundary.
  double green(Complex x, Complex p) const;
  // H(x,p) = G(x,p) + (1/2 pi) log|x - p|.
  double regular_part(Complex x, Complex p) const;

  // Harmonic function in the domain with the given boundary values.
  HarmonicExtension extend(std::function<double(Complex)> boundary_data) const;

  struct Impl;

private:
  explicit DomainModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

class HarmonicExtension {
public:
  struct Impl;
  explicit HarmonicExtension(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  HarmonicExtension() = default;

  // Interior value; on the boundary (radial fraction >= 1 - 1e-13) returns the data.
  double operator()(Complex x) const;
  bool valid() const { return impl_ != nullptr; }

private:
  std::shared_ptr<const Impl> impl_;
};

bool symmetry_check(const DomainModel& domain, int order);

// alpha complex roots of b: principal root first, then increasing argument.
std::vector<Complex> roots_of_b(Complex b, int alpha);

// Derivative data of the holomorphic extension of H at the origin.
struct KernelData {
  DomainModel domain;
  int alpha = 1;
  int k_max = 2;
  double robin_origin = 0.0;      // H(0,0)
  std::vector<Complex> holo_dx;   // holo_dx[k] = d^k H~/dx^k (0,0), k = 1..k_max; [0] unused
  std::vector<Complex> mixed;     // mixed[k] = d^{k+alpha} H~/dp^alpha dx^k (0,0), k = 1..alpha
  std::vector<Complex> mixed_conj;  // same with alpha derivatives in conj(p); [0] unused
  double conditioning = 0.0;      // largest two-radius disagreement seen

  // grad_x H(0,0) as the complex number dH/dx1 + i dH/dx2.
  Complex grad_origin() const { return std::conj(holo_dx.at(1)); }
  double H0(Complex x) const { return domain.regular_part(x, 0.0); }
};

KernelData holomorphic_derivatives(const DomainModel& domain, int k_max, int alpha);

// |sum_i (H(x,beta_i) - H(0,beta_i)) - expansion| with the expansion built from
// KernelData (both the p- and conj(p)-derivative terms).
double sum_over_roots_expansion_check(const KernelData& kernels, Complex b, Complex x);

// Coefficient a(x) of the equation with its second-order data at 0.
class PotentialModel {
public:
  static PotentialModel quadratic(double a0, Complex grad, double a11, double a22, double a12 = 0.0);
  static PotentialModel expression(const std::string& expr, double a0, Complex grad, double a11,
                                   double a22, double a12 = 0.0);
  static PotentialModel custom(std::function<double(Complex)> a, double a0, Complex grad,
                               double a11, double a22, double a12 = 0.0);

  double operator()(Complex x) const { return a_(x); }
  double a0() const { return a0_; }
  Complex grad() const { return grad_; }  // da/dx1 + i da/dx2 at 0
  double a11() const { return a11_; }
  double a22() const { return a22_; }
  double a12() const { return a12_; }
  const std::string& description() const { return description_; }

  // Largest mismatch between the declared data at 0 and central differences of a.
  double derivative_mismatch(double step = 1e-3) const;
  // Minimum of a over a polar sample grid of the domain.
  double sampled_minimum(const DomainModel& domain) const;
  // Throws ArgumentError unless inf a > 0 and the derivative data match within tol.
  void validate(const DomainModel& domain, double tol = 1e-6) const;

private:
  std::function<double(Complex)> a_;
  double a0_ = 1.0;
  Complex grad_{};
  double a11_ = 0.0, a22_ = 0.0, a12_ = 0.0;
  std::string description_;
};

// {"kind":"unit_disk"} | {"kind":"scaled_disk","radius":R} |
// {"kind":"curve","fourier_cos":[...],"fourier_sin":[...],"symmetry_order":l} |
// {"kind":"ellipse","a":..,"b":..}
DomainModel domain_from_json(const nlohmann::json& spec, const std::string& path = "domain");
nlohmann::json domain_to_json(const DomainModel& domain);
// {"a0":..,"grad":[..,..],"a11":..,"a22":..,"profile":"quadratic"|"expr","expr":"..."}
PotentialModel potential_from_json(const nlohmann::json& spec, const std::string& path = "potential");

}  // namespace liouville::geometry
