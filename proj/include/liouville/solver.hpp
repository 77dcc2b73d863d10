#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "liouville/bubble.hpp"
#include "liouville/common.hpp"
#include "liouville/discretization.hpp"
#include "liouville/geometry.hpp"
#include "liouville/reduction.hpp"

namespace liouville::solver {

// Problem data shared by every (lambda, b) solve on one mesh: the coefficient
// a, the kernel data of the domain and the potential V sampled on the mesh.
class ReductionContext {
public:
  ReductionContext(geometry::PotentialModel pot, geometry::KernelData kernels, discretization::Discretization disc);

  const geometry::PotentialModel& potential() const { return pot_; }
  const geometry::KernelData& kernels() const { return kernels_; }
  const discretization::Discretization& disc() const { return disc_; }
  int alpha() const { return kernels_.alpha; }
  double A() const { return A_; }
  const Eigen::VectorXd& potential_qp() const { return V_qp_; }
  const Eigen::VectorXd& potential_nodes() const { return V_nodes_; }

private:
  geometry::PotentialModel pot_;
  geometry::KernelData kernels_;
  discretization::Discretization disc_;
  double A_ = 0.0;
  Eigen::VectorXd V_qp_, V_nodes_;
};

struct BorderedFactor;

// The ansatz at (lambda, b) with its projections and the factored bordered
// operator of the linearized problem.
struct Ansatz {
  bubble::BubbleParams params;
  double lambda = 0.0;
  bubble::Projection pw;
  bubble::Projection pz1;
  bubble::Projection pz2;
  Eigen::VectorXd weight_qp;     // |x|^{2(alpha-1)} e^W
  Eigen::VectorXd potential_qp;  // lambda V |x|^{2(alpha-1)} e^{PW}
  std::vector<Eigen::VectorXd> constraint_rows;  // int w Z^j psi_i over interior nodes, j = 1, 2
  std::shared_ptr<const BorderedFactor> factor;
  double smallest_singular_value = 0.0;  // of the bordered matrix, by inverse iteration
};

// delta follows lambda and b. Throws ResolutionError if the mesh does not
// resolve the bubble and NearResonanceError if the bordered system is singular.
Ansatz build_ansatz(const ReductionContext& ctx, double lambda, Complex b,
                    const bubble::ResolutionCheck& check = {});

struct LinearizedSolution {
  discretization::Field phi;
  double c1 = 0.0;
  double c2 = 0.0;
  discretization::LinearSolveReport report;
};

// -Delta phi - lambda V |x|^{2(alpha-1)} e^{PW} phi = Delta h + sum_j c_j Z^j w,
// int grad phi . grad PZ^j = 0 for j = 1, 2.
LinearizedSolution solve_linearized(const Ansatz& ansatz, const discretization::Field& h);
// Same operator with a general right side given by quadrature values f:
// the load is int f psi.
LinearizedSolution solve_linearized_load(const Ansatz& ansatz, const Eigen::VectorXd& f_qp);

// Largest ||phi|| / ||h|| of the linearized solve, by power iteration in H^1_0.
double inverse_norm_estimate(const Ansatz& ansatz, int iterations = 12);

// lambda V |x|^{2(alpha-1)} e^{PW} (e^phi - 1 - phi) at quadrature points, and
// the H^1_0 representative of it (its Poisson solve). Throws ContractionError
// if |phi| exceeds cap somewhere.
Eigen::VectorXd nonlinear_term_qp(const Ansatz& ansatz, const discretization::Field& phi, double cap = 20.0);
discretization::Field nonlinear_remainder(const Ansatz& ansatz, const discretization::Field& phi, double cap = 20.0);

struct ContractionOptions {
  double tol = 1e-11;  // H^1 distance between successive iterates
  int max_iter = 50;
  double epsilon = 0.05;  // ball radius lambda^{1/alpha - epsilon}
  double cap = 20.0;
};

struct ReducedState {
  double lambda = 0.0;
  Complex b{};
  discretization::Field phi;
  double c1 = 0.0;
  double c2 = 0.0;
  int iterations = 0;
  double phi_norm = 0.0;
  bool converged = false;
  bool outside_ball = false;  // fixed point beyond lambda^{1/alpha - epsilon}
  std::vector<double> history;  // successive iterate distances
};

// Fixed point of phi -> L^{-1}(-R + N(phi)) together with the multipliers.
ReducedState contraction_solve(const Ansatz& ansatz, const ContractionOptions& options = {});
ReducedState contraction_solve(const ReductionContext& ctx, double lambda, Complex b,
                               const ContractionOptions& options = {});

struct SolutionDiagnostics {
  double mass = 0.0;        // lambda int V |x|^{2(alpha-1)} e^v
  double local_mass = 0.0;  // same over |x| < local_radius
  double farfield_error = 0.0;  // max over |x| = farfield_radius of |u - 4 pi (N+2) G(x,0)|
  double energy = 0.0;      // 1/2 int |grad v|^2 - lambda int V |x|^{2(alpha-1)} e^v
  double residual_outside_span = 0.0;  // relative residual after removing c_j Z^j w
};

struct AssembledSolution {
  discretization::Field v;  // PW + phi; u = v - 4 pi (alpha - 1) G(., 0)
  SolutionDiagnostics diagnostics;
};

AssembledSolution assemble_solution(const Ansatz& ansatz, const ReducedState& state, double local_radius = 0.25,
                                    double farfield_radius = 0.5);

// b -> (c1, c2) of the intermediate problem at fixed lambda.
reduction::MultiplierMap multiplier_map(const ReductionContext& ctx, double lambda,
                                        const ContractionOptions& options = {});

struct ContinuationRow;

// Called once per successful rung with the solved state.
using SolutionCallback =
    std::function<void(const ContinuationRow&, const Ansatz&, const ReducedState&, const AssembledSolution&)>;

struct ContinuationConfig {
  double nodes_per_delta = 16.0;
  SolutionCallback on_solution;
  ContractionOptions contraction;
  reduction::RootSearchOptions root_search;
  bool force = false;  // run even when no theorem case applies
};

struct ContinuationRow {
  double lambda = 0.0;
  double delta = 0.0;
  Complex b_star{};
  double phi_norm = 0.0;
  double mass = 0.0;
  double local_mass = 0.0;
  double farfield_error = 0.0;
  double inv_norm_estimate = 0.0;
  double energy = 0.0;
  double multiplier_norm = 0.0;  // |(c1, c2)| at b_star
  int iterations = 0;
  int map_evaluations = 0;
  std::size_t mesh_nodes = 0;
  bool converged = false;
  bool outside_ball = false;
  std::string error;  // empty on success
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

// Least squares fit of log y against log x over the positive entries.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceReport {
  reduction::AssumptionReport assumptions;
  std::vector<ContinuationRow> rows;  // decreasing lambda
  SlopeFit phi_slope;       // log ||phi|| against log lambda
  SlopeFit b_slope;         // log |b*| against log delta
  SlopeFit mass_gap_slope;  // log |mass - 8 pi alpha| against log lambda
  SlopeFit farfield_slope;  // log farfield error against log lambda
};

// Throws UsageError if the ladder is empty or not strictly decreasing, and
// ArgumentError if no theorem case applies and force is off.
ConvergenceReport continuation(const geometry::DomainModel& domain, const geometry::PotentialModel& pot, int N,
                               const std::vector<double>& lambda_ladder, const ContinuationConfig& config = {});

}  // namespace liouville::solver
