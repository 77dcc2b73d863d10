#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "liouville/common.hpp"
#include "liouville/discretization.hpp"
#include "liouville/geometry.hpp"

namespace liouville::bubble {

// Ansatz parameters: the bubble concentrates at the alpha roots of b with scale delta.
struct BubbleParams {
  int alpha = 1;
  double delta = 1.0;
  Complex b{};
  std::vector<Complex> roots;

  // Throws ArgumentError for alpha < 1 or delta <= 0.
  static BubbleParams make(int alpha, double delta, Complex b = {});
  double delta_2a() const { return std::pow(delta, 2 * alpha); }  // delta^{2 alpha}
};

// V(x) = a(x) exp(-4 pi (alpha - 1) H(x, 0)).
double potential_V(const geometry::PotentialModel& pot, const geometry::KernelData& kernels, Complex x);
Eigen::VectorXd sample_potential_qp(const geometry::PotentialModel& pot, const geometry::KernelData& kernels,
                                    const discretization::Discretization& disc);

// delta^{2 alpha} = lambda/(8 alpha^2) V(0) exp(8 pi sum_i H(0, beta_i)).
double delta_from_lambda(double lambda, Complex b, const geometry::PotentialModel& pot,
                         const geometry::KernelData& kernels, int alpha);

// W(x) = log(8 alpha^2 delta^{2 alpha} / (delta^{2 alpha} + |x^alpha - b|^2)^2).
double bubble_eval(const BubbleParams& p, Complex x);
// |x|^{2(alpha-1)} e^{W(x)} in factored form.
double weight_eval(const BubbleParams& p, Complex x);
// Z^0 = (delta^{2a} - q)/(delta^{2a} + q), Z^1 + i Z^2 = delta^alpha (x^alpha - b)/(delta^{2a} + q),
// with q = |x^alpha - b|^2.
double kernel_eval(const BubbleParams& p, int j, Complex x);

// Lower bound on mesh nodes per concentration length delta, measured as the
// node count inside |x^alpha - b| <= delta^alpha against the count a mesh of
// spacing delta/m would place in that region.
struct ResolutionCheck {
  double min_nodes_per_delta = 8.0;
};

// Area of the concentration region |x^alpha - b| <= delta^alpha (pi delta^2 at b = 0).
double concentration_area(const BubbleParams& p);

// Throws ResolutionError if the discretization does not resolve the bubble.
void check_resolution(const BubbleParams& p, const discretization::Discretization& disc,
                      const ResolutionCheck& check = {});

// A projection Pv = v - E(v restricted to the boundary), E the harmonic
// extension. The field carries its source -Delta Pv at the quadrature points.
struct Projection {
  discretization::Field field;
  Eigen::VectorXd extension_qp;  // E(v) at quadrature points
  std::optional<double> expansion_residual;
};

// PW with source |x|^{2(alpha-1)} e^W. The optional residual is the sup over
// mesh nodes of |PW - (W - log(8 alpha^2 delta^{2 alpha}) + 8 pi sum_i H(x, beta_i))|.
Projection project_bubble(const BubbleParams& p, const discretization::Discretization& disc,
                          bool with_expansion_residual = false, const ResolutionCheck& check = {});

// PZ^j with source |x|^{2(alpha-1)} e^W Z^j. Residual: sup |PZ^0 - Z^0 - 1| for
// j = 0 and sup |PZ^j - Z^j| for j = 1, 2.
Projection project_kernel(const BubbleParams& p, int j, const discretization::Discretization& disc,
                          bool with_expansion_residual = false, const ResolutionCheck& check = {});

// R = |x|^{2(alpha-1)} e^W - lambda V |x|^{2(alpha-1)} e^{PW} at quadrature points.
struct Residual {
  Eigen::VectorXd qp;
  Eigen::VectorXd nodal;
  double lp_norm = 0.0;
  double integral = 0.0;       // int R
  double solution_mass = 0.0;  // lambda int V |x|^{2(alpha-1)} e^{PW}
};

// lambda V |x|^{2(alpha-1)} e^{PW} at quadrature points, computed as
// lambda V w exp(-E(W)) with w the bubble weight.
Eigen::VectorXd nonlinear_weight_qp(const BubbleParams& p, double lambda, const Eigen::VectorXd& potential_qp,
                                    const Projection& pw, const discretization::Discretization& disc);

Residual residual_R(const BubbleParams& p, double lambda, const geometry::PotentialModel& pot,
                    const geometry::KernelData& kernels, const discretization::Discretization& disc, double lp);
Residual residual_R(const BubbleParams& p, double lambda, const Eigen::VectorXd& potential_qp,
                    const Eigen::VectorXd& potential_nodes, const Projection& pw,
                    const discretization::Discretization& disc, double lp);

}  // namespace liouville::bubble
