#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "liouville/bubble.hpp"
#include "liouville/common.hpp"
#include "liouville/discretization.hpp"
#include "liouville/geometry.hpp"

namespace liouville::reduction {

enum class TheoremCase { thm1, thm2, none };
std::string to_string(TheoremCase c);

struct AssumptionReport {
  TheoremCase theorem_case = TheoremCase::none;
  double gradient_condition_residual = 0.0;  // |grad a(0) + 4 pi (N+2) a(0) grad_x H(0,0)|
  double A_value = 0.0;
  bool symmetry_ok = false;  // rotational symmetry of order >= 3 about 0
  std::vector<std::string> warnings;
};

// Classifies the data against the two existence theorems: thm1 needs alpha >= 3,
// the gradient condition and A != 0; thm2 needs alpha = 2, order >= 3 symmetry,
// grad a(0) = 0, a11 = a22 != 0. A is always computed.
AssumptionReport check_assumptions(const geometry::PotentialModel& pot, const geometry::KernelData& kernels, int N,
                                   double tol = 1e-8);

// A = 4 pi^2 (alpha+1)^2 |dH~/dx(0,0)|^2 - (a11 + a22)/(4 a(0)).
double constant_A(const geometry::PotentialModel& pot, const geometry::KernelData& kernels);

struct ReducedMapValue {
  std::array<double, 2> F{};
  std::array<std::array<double, 2>, 2> J{};  // J[i][k] = dF_i/dB_k
  double error_estimate = 0.0;
};

// F(B) = int |y|^{2 alpha} (Re, Im)(y^alpha - B) / (1 + |y^alpha - B|^2)^3 dy with the
// Jacobian from the differentiated integrands. Requires alpha >= 2 and |B| <= 2.
ReducedMapValue reduced_map_F(Complex B, int alpha, double tol = 1e-11, bool with_jacobian = true);

// (1/alpha) int |y|^{2/alpha} (2|y|^2 - 1)/(1 + |y|^2)^4 dy, the common diagonal entry of DF(0).
double jacobian_at_zero(int alpha, double tol = 1e-12);

enum class Part { re, im };

// int |x|^{2(alpha-1)} e^W PZ^j Re/Im(xi x^gamma) over the mesh.
double moment_integral(const bubble::BubbleParams& p, const bubble::Projection& pz, int gamma, Complex xi, Part part);
// Stated leading term of the gamma = alpha moment: +-4 pi alpha^2 delta^alpha times Re or Im of xi.
double moment_leading_term(const bubble::BubbleParams& p, int j, Complex xi, Part part);

// int |x|^{2(alpha-1)} e^W PZ^j Re(xi1 x) Re(xi2 x) (part re) or Im(xi1 x) Im(xi2 x) (part im).
double quadratic_moment_integral(const bubble::BubbleParams& p, const bubble::Projection& pz, Complex xi1,
                                 Complex xi2, Part part);
// (delta^2/2) <xi1, xi2> int |x|^{2 alpha} e^W Z^j, the whole-plane integral in
// concentration units being 8 alpha^2 F_j(delta^{-alpha} b).
double quadratic_moment_model(const bubble::BubbleParams& p, int j, Complex xi1, Complex xi2);
// Stated alpha = 2 correction: +2 pi alpha^2 delta^2 Re(xi1 xi2) for (j=1, re), -... Im for (2, re),
// -... Re for (1, im), +... Im for (2, im).
double quadratic_moment_correction(const bubble::BubbleParams& p, int j, Complex xi1, Complex xi2, Part part);

struct MultiplierForm {
  double computed = 0.0;  // int grad PW grad PZ^j - lambda int V |x|^{2(alpha-1)} e^{PW} PZ^j
  double model = 0.0;     // 8 alpha^2 A delta^2 F_j(delta^{-alpha} b)
};

MultiplierForm multiplier_leading_form(const bubble::BubbleParams& p, double lambda,
                                       const geometry::PotentialModel& pot, const geometry::KernelData& kernels,
                                       const discretization::Discretization& disc, int j);
// Same with precomputed pieces (potential at quadrature points and PW, PZ^j).
MultiplierForm multiplier_leading_form(const bubble::BubbleParams& p, double lambda, double A,
                                       const Eigen::VectorXd& potential_qp, const bubble::Projection& pw,
                                       const bubble::Projection& pz, int j);

// b -> (c1, c2), the multipliers of the intermediate problem.
using MultiplierMap = std::function<std::array<double, 2>(Complex)>;

struct RootSearchOptions {
  double search_radius_factor = 2.0;  // disk |b| <= r delta^alpha
  int circle_samples = 12;
  int max_refinements = 3;            // bisections of circle arcs with large angle jumps
  double tol_c = 0.0;                 // default 1e-9 * (2/3) pi alpha
  double degeneracy_floor = 1e-2;     // min |c| on the circle must exceed this * delta^2
  int max_newton = 15;
};

struct ScanSample {
  Complex b;
  std::array<double, 2> c;
};

struct RootResult {
  Complex b{};
  std::array<double, 2> c{};
  int winding = 0;
  int evaluations = 0;
  int newton_iterations = 0;
  double min_circle_norm = 0.0;
  std::vector<ScanSample> circle;
};

// Zero of the multiplier map in |b| <= r delta^alpha: degree evidence from the
// winding of c along the boundary circle, then Newton with a finite-difference
// Jacobian (fallback: restarts from the best point of a polar grid). Throws
// RootNotFoundError without degree evidence or when no zero is reached.
RootResult solve_for_b(const MultiplierMap& map, double delta, int alpha, const RootSearchOptions& options = {},
                       Complex warm_start = {});

}  // namespace liouville::reduction
