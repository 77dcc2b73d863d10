#include "liouville/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

namespace liouville::solver {

using discretization::Discretization;
using discretization::Field;

ReductionContext::ReductionContext(geometry::PotentialModel pot, geometry::KernelData kernels, Discretization disc)
    : pot_(std::move(pot)), kernels_(std::move(kernels)), disc_(std::move(disc)) {
  A_ = reduction::constant_A(pot_, kernels_);
  V_qp_ = bubble::sample_potential_qp(pot_, kernels_, disc_);
  V_nodes_ = discretization::sample_nodes(disc_, [&](Complex x) { return bubble::potential_V(pot_, kernels_, x); });
}

struct BorderedFactor {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::SparseMatrix<double> matrix;
  Eigen::Index interior = 0;
};

namespace {

// [ S - M_K   -m1  -m2 ]
// [ -m1^T      0    0  ]
// [ -m2^T      0    0  ]
std::shared_ptr<BorderedFactor> factor_bordered(const Discretization& disc, const Eigen::VectorXd& k_qp,
                                                const std::vector<Eigen::VectorXd>& rows, double& smallest_sv) {
  auto f = std::make_shared<BorderedFactor>();
  const Eigen::SparseMatrix<double> a =
      discretization::interior_stiffness(disc) - discretization::weighted_mass_matrix(disc, k_qp);
  const Eigen::Index n = a.rows();
  f->interior = n;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() + 4 * n));
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
      triplets.emplace_back(it.row(), it.col(), it.value());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const Eigen::Index border = n + static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = rows[j][i];
      if (v == 0.0) continue;
      triplets.emplace_back(i, border, -v);
      triplets.emplace_back(border, i, -v);
    }
  }
  const Eigen::Index size = n + static_cast<Eigen::Index>(rows.size());
  f->matrix.resize(size, size);
  f->matrix.setFromTriplets(triplets.begin(), triplets.end());
  f->matrix.makeCompressed();
  f->lu.analyzePattern(f->matrix);
  f->lu.factorize(f->matrix);
  if (f->lu.info() != Eigen::Success) throw NearResonanceError("bordered system is singular", 0.0);

  // The matrix is symmetric, so inverse iteration yields its smallest singular value.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(size) / std::sqrt(static_cast<double>(size));
  double growth = 0.0;
  for (int it = 0; it < 12; ++it) {
    Eigen::VectorXd y = f->lu.solve(x);
    growth = y.norm();
    if (!std::isfinite(growth) || growth == 0.0) throw NearResonanceError("bordered solve failed", 0.0);
    x = y / growth;
  }
  smallest_sv = 1.0 / growth;
  double scale = 0.0;
  for (Eigen::Index col = 0; col < f->matrix.outerSize(); ++col) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(f->matrix, col); it; ++it) s += std::abs(it.value());
    scale = std::max(scale, s);
  }
  if (smallest_sv < 1e-13 * scale)
    throw NearResonanceError("bordered system is near resonance (smallest singular value " +
                                 std::to_string(smallest_sv) + ")",
                             smallest_sv);
  return f;
}

}  // namespace

Ansatz build_ansatz(const ReductionContext& ctx, double lambda, Complex b, const bubble::ResolutionCheck& check) {
  if (!(lambda > 0.0)) throw ArgumentError("build_ansatz: lambda must be positive");
  const auto& disc = ctx.disc();
  const int alpha = ctx.alpha();
  const double delta = bubble::delta_from_lambda(lambda, b, ctx.potential(), ctx.kernels(), alpha);
  const auto params = bubble::BubbleParams::make(alpha, delta, b);
  Ansatz a{.params = params,
           .lambda = lambda,
           .pw = bubble::project_bubble(params, disc, false, check),
           .pz1 = bubble::project_kernel(params, 1, disc, false, check),
           .pz2 = bubble::project_kernel(params, 2, disc, false, check)};
  a.weight_qp = discretization::sample_qp(disc, [&](Complex x) { return bubble::weight_eval(a.params, x); });
  a.potential_qp = bubble::nonlinear_weight_qp(a.params, lambda, ctx.potential_qp(), a.pw, disc);
  for (const auto* pz : {&a.pz1, &a.pz2}) a.constraint_rows.push_back(discretization::load_vector(disc, *pz->field.source()));
  a.factor = factor_bordered(disc, a.potential_qp, a.constraint_rows, a.smallest_singular_value);
  return a;
}

namespace {

LinearizedSolution solve_load(const Ansatz& a, const Eigen::VectorXd& load) {
  const auto& disc = a.pw.field.disc();
  const auto& f = *a.factor;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f.matrix.rows());
  rhs.head(f.interior) = load;
  const Eigen::VectorXd x = f.lu.solve(rhs);
  if (f.lu.info() != Eigen::Success) throw Error("solve_linearized: factorized solve failed");
  LinearizedSolution s{.phi = Field(disc, discretization::extend_interior(disc, x.head(f.interior))),
                       .c1 = x[f.interior],
                       .c2 = x[f.interior + 1],
                       .report = {}};
  s.report.method = "bordered sparse LU (COLAMD ordering)";
  s.report.unknowns = static_cast<std::size_t>(f.matrix.rows());
  s.report.nonzeros = static_cast<std::size_t>(f.matrix.nonZeros());
  const double bn = rhs.norm();
  s.report.residual_norm = bn > 0.0 ? (f.matrix * x - rhs).norm() / bn : (f.matrix * x).norm();
  return s;
}

}  // namespace

LinearizedSolution solve_linearized(const Ansatz& a, const Field& h) {
  const auto& disc = a.pw.field.disc();
  if (!(h.disc() == disc)) throw ArgumentError("solve_linearized: h lives on a different discretization");
  // Delta h tested against psi is -int grad h . grad psi.
  Eigen::VectorXd load = h.source() ? discretization::load_vector(disc, *h.source())
                                    : Eigen::VectorXd(discretization::interior_stiffness(disc) *
                                                      discretization::restrict_interior(disc, h.nodal()));
  return solve_load(a, -load);
}

LinearizedSolution solve_linearized_load(const Ansatz& a, const Eigen::VectorXd& f_qp) {
  return solve_load(a, discretization::load_vector(a.pw.field.disc(), f_qp));
}

double inverse_norm_estimate(const Ansatz& a, int iterations) {
  const auto& disc = a.pw.field.disc();
  // Start from a smooth field that is not orthogonal to the radial modes.
  Field h = discretization::interpolate(disc, [&](Complex x) {
    const double s = disc.domain().radial_fraction(x);
    return (1.0 - s * s) * (1.0 + 0.3 * x.real() + 0.2 * x.imag());
  });
  double ratio = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double hn = discretization::h1_norm(h);
    const auto s = solve_linearized(a, h);
    const double pn = discretization::h1_norm(s.phi);
    ratio = pn / hn;
    if (pn == 0.0) break;
    h = Field(disc, s.phi.nodal() / pn);
  }
  return ratio;
}

Eigen::VectorXd nonlinear_term_qp(const Ansatz& a, const Field& phi, double cap) {
  const Eigen::VectorXd& p = phi.qp();
  if (p.cwiseAbs().maxCoeff() > cap)
    throw ContractionError("nonlinear remainder: |phi| exceeds the cap " + std::to_string(cap), {});
  const Eigen::ArrayXd e = p.array().exp() - 1.0 - p.array();
  return (a.potential_qp.array() * e).matrix();
}

Field nonlinear_remainder(const Ansatz& a, const Field& phi, double cap) {
  return discretization::poisson_solve_qp(a.pw.field.disc(), nonlinear_term_qp(a, phi, cap)).first;
}

ReducedState contraction_solve(const Ansatz& a, const ContractionOptions& options) {
  const auto& disc = a.pw.field.disc();
  const Eigen::VectorXd minus_r = a.potential_qp - a.weight_qp;
  ReducedState st{.lambda = a.lambda, .b = a.params.b, .phi = Field::zero(disc)};
  for (int it = 1; it <= options.max_iter; ++it) {
    const auto s = solve_linearized_load(a, minus_r + nonlinear_term_qp(a, st.phi, options.cap));
    const double dist = discretization::h1_norm(Field(disc, s.phi.nodal() - st.phi.nodal()));
    st.phi = s.phi;
    st.c1 = s.c1;
    st.c2 = s.c2;
    st.iterations = it;
    st.history.push_back(dist);
    if (!std::isfinite(dist)) break;
    if (dist <= options.tol) {
      st.converged = true;
      break;
    }
  }
  if (!st.converged)
    throw ContractionError("contraction did not converge in " + std::to_string(options.max_iter) + " iterations",
                           st.history);
  st.phi_norm = discretization::h1_norm(st.phi);
  st.outside_ball = st.phi_norm > std::pow(a.lambda, 1.0 / a.params.alpha - options.epsilon);
  return st;
}

ReducedState contraction_solve(const ReductionContext& ctx, double lambda, Complex b,
                               const ContractionOptions& options) {
  return contraction_solve(build_ansatz(ctx, lambda, b), options);
}

AssembledSolution assemble_solution(const Ansatz& a, const ReducedState& st, double local_radius,
                                    double farfield_radius) {
  const auto& disc = a.pw.field.disc();
  const auto& dom = disc.domain();
  const int alpha = a.params.alpha;
  const Field& phi = st.phi;
  AssembledSolution out{.v = Field(disc, a.pw.field.nodal() + phi.nodal(), a.pw.field.qp() + phi.qp()),
                        .diagnostics = {}};
  auto& d = out.diagnostics;

  const Eigen::VectorXd density = a.potential_qp.cwiseProduct(phi.qp().array().exp().matrix());
  d.mass = discretization::integrate(disc, density);
  Eigen::VectorXd local = density;
  const auto& qp = disc.qp_points();
  for (std::size_t i = 0; i < qp.size(); ++i)
    if (std::abs(qp[i]) >= local_radius) local[static_cast<Eigen::Index>(i)] = 0.0;
  d.local_mass = discretization::integrate(disc, local);

  const double pw_pw = discretization::h1_inner(a.pw.field, a.pw.field);
  const double pw_phi = discretization::h1_inner(phi, a.pw.field);
  const double phi_phi = discretization::h1_inner(phi, phi);
  d.energy = 0.5 * (pw_pw + 2.0 * pw_phi + phi_phi) - d.mass;

  // Discrete equation: S phi + int w psi - int K e^phi psi - sum c_j m_j.
  const Eigen::VectorXd load_w = discretization::load_vector(disc, a.weight_qp);
  const Eigen::VectorXd res = discretization::interior_stiffness(disc) *
                                  discretization::restrict_interior(disc, phi.nodal()) +
                              load_w - discretization::load_vector(disc, density) -
                              st.c1 * a.constraint_rows[0] - st.c2 * a.constraint_rows[1];
  d.residual_outside_span = res.norm() / load_w.norm();

  // u = PW + phi - 4 pi (alpha - 1) G with PW = W - E(W) evaluated in closed form.
  const auto ext = dom.extend([&](Complex x) { return bubble::bubble_eval(a.params, x); });
  const int samples = 64;
  for (int k = 0; k < samples; ++k) {
    const Complex x = std::polar(farfield_radius, 2.0 * pi * (k + 0.5) / samples);
    const double g = dom.green(x, 0.0);
    const double u = bubble::bubble_eval(a.params, x) - ext(x) + phi.at(x) - 4.0 * pi * (alpha - 1) * g;
    d.farfield_error = std::max(d.farfield_error, std::abs(u - 4.0 * pi * (alpha + 1) * g));
  }
  return out;
}

reduction::MultiplierMap multiplier_map(const ReductionContext& ctx, double lambda, const ContractionOptions& options) {
  return [&ctx, lambda, options](Complex b) {
    const auto st = contraction_solve(ctx, lambda, b, options);
    return std::array<double, 2>{st.c1, st.c2};
  };
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("fit_loglog: size mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) pts.emplace_back(std::log(x[i]), std::log(y[i]));
  SlopeFit fit;
  fit.points = pts.size();
  if (pts.size() < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (const auto& [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [a, b] : pts) {
    sxx += (a - mx) * (a - mx);
    sxy += (a - mx) * (b - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

ConvergenceReport continuation(const geometry::DomainModel& domain, const geometry::PotentialModel& pot, int N,
                               const std::vector<double>& ladder, const ContinuationConfig& config) {
  if (ladder.empty()) throw UsageError("continuation: empty lambda ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw UsageError("continuation: lambda values must be positive");
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw UsageError("continuation: lambda ladder must strictly decrease");
  }
  if (N < 1) throw UsageError("continuation: N must be >= 1");
  const int alpha = N + 1;
  const auto kernels = geometry::holomorphic_derivatives(domain, alpha + 1, alpha);
  ConvergenceReport report;
  report.assumptions = reduction::check_assumptions(pot, kernels, N);
  if (report.assumptions.theorem_case == reduction::TheoremCase::none && !config.force)
    throw ArgumentError("continuation: no theorem case applies to the data");

  Complex warm{};
  for (const double lambda : ladder) {
    ContinuationRow row;
    row.lambda = lambda;
    try {
      row.delta = bubble::delta_from_lambda(lambda, 0.0, pot, kernels, alpha);
      const auto disc = discretization::build(
          domain, discretization::Resolution::for_bubble(row.delta, config.nodes_per_delta));
      row.mesh_nodes = disc.node_count();
      const ReductionContext ctx(pot, kernels, disc);
      const auto root = reduction::solve_for_b(multiplier_map(ctx, lambda, config.contraction), row.delta, alpha,
                                               config.root_search, warm);
      row.map_evaluations = root.evaluations;
      row.b_star = root.b;
      row.multiplier_norm = std::hypot(root.c[0], root.c[1]);
      const Ansatz a = build_ansatz(ctx, lambda, root.b);
      const ReducedState st = contraction_solve(a, config.contraction);
      const auto sol = assemble_solution(a, st);
      row.phi_norm = st.phi_norm;
      row.iterations = st.iterations;
      row.converged = st.converged;
      row.outside_ball = st.outside_ball;
      row.mass = sol.diagnostics.mass;
      row.local_mass = sol.diagnostics.local_mass;
      row.farfield_error = sol.diagnostics.farfield_error;
      row.energy = sol.diagnostics.energy;
      row.inv_norm_estimate = inverse_norm_estimate(a);
      warm = root.b;
      if (config.on_solution) config.on_solution(row, a, st, sol);
    } catch (const Error& e) {
      row.error = e.what();
      warm = {};
    }
    report.rows.push_back(row);
  }

  std::vector<double> lam, del, phin, bn, gap, far;
  for (const auto& r : report.rows) {
    if (!r.error.empty()) continue;
    lam.push_back(r.lambda);
    del.push_back(r.delta);
    phin.push_back(r.phi_norm);
    bn.push_back(std::abs(r.b_star));
    gap.push_back(std::abs(r.mass - 8.0 * pi * alpha));
    far.push_back(r.farfield_error);
  }
  report.phi_slope = fit_loglog(lam, phin);
  report.b_slope = fit_loglog(del, bn);
  report.mass_gap_slope = fit_loglog(lam, gap);
  report.farfield_slope = fit_loglog(lam, far);
  return report;
}

}  // namespace liouville::solver
