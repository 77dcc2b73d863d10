#include "liouville/bubble.hpp"

#include <algorithm>
#include <cmath>

namespace liouville::bubble {

using discretization::Discretization;
using discretization::Field;

BubbleParams BubbleParams::make(int alpha, double delta, Complex b) {
  if (alpha < 1) throw ArgumentError("bubble: alpha must be >= 1");
  if (!(delta > 0.0)) throw ArgumentError("bubble: delta must be positive");
  BubbleParams p;
  p.alpha = alpha;
  p.delta = delta;
  p.b = b;
  p.roots = geometry::roots_of_b(b, alpha);
  return p;
}

double potential_V(const geometry::PotentialModel& pot, const geometry::KernelData& kernels, Complex x) {
  const int alpha = kernels.alpha;
  if (alpha == 1) return pot(x);
  return pot(x) * std::exp(-4.0 * pi * (alpha - 1) * kernels.domain.regular_part(x, 0.0));
}

Eigen::VectorXd sample_potential_qp(const geometry::PotentialModel& pot, const geometry::KernelData& kernels,
                                    const Discretization& disc) {
  return discretization::sample_qp(disc, [&](Complex x) { return potential_V(pot, kernels, x); });
}

double delta_from_lambda(double lambda, Complex b, const geometry::PotentialModel& pot,
                         const geometry::KernelData& kernels, int alpha) {
  if (!(lambda > 0.0)) throw ArgumentError("delta_from_lambda: lambda must be positive");
  if (alpha < 1) throw ArgumentError("delta_from_lambda: alpha must be >= 1");
  double robin_sum = 0.0;
  for (const Complex beta : geometry::roots_of_b(b, alpha)) robin_sum += kernels.domain.regular_part(0.0, beta);
  const double v0 = pot.a0() * std::exp(-4.0 * pi * (alpha - 1) * kernels.robin_origin);
  const double d2a = lambda / (8.0 * alpha * alpha) * v0 * std::exp(8.0 * pi * robin_sum);
  return std::pow(d2a, 1.0 / (2.0 * alpha));
}

namespace {

inline double shift_sq(const BubbleParams& p, Complex x) { return std::norm(ipow(x, p.alpha) - p.b); }

}  // namespace

double bubble_eval(const BubbleParams& p, Complex x) {
  const double d2a = p.delta_2a();
  const double a = p.alpha;
  return std::log(8.0 * a * a * d2a) - 2.0 * std::log(d2a + shift_sq(p, x));
}

double weight_eval(const BubbleParams& p, Complex x) {
  const double d2a = p.delta_2a();
  const double a = p.alpha;
  const double den = d2a + shift_sq(p, x);
  return 8.0 * a * a * d2a * std::pow(std::norm(x), p.alpha - 1) / (den * den);
}

double kernel_eval(const BubbleParams& p, int j, Complex x) {
  const double d2a = p.delta_2a();
  const Complex z = ipow(x, p.alpha) - p.b;
  const double q = std::norm(z);
  switch (j) {
    case 0: return (d2a - q) / (d2a + q);
    case 1: return std::pow(p.delta, p.alpha) * z.real() / (d2a + q);
    case 2: return std::pow(p.delta, p.alpha) * z.imag() / (d2a + q);
    default: throw ArgumentError("kernel_eval: j must be 0, 1 or 2");
  }
}

double concentration_area(const BubbleParams& p) {
  // Preimage under x -> x^alpha of the disk |z - b| <= delta^alpha. A ray at
  // angle phi meets the disk in [r1, r2], and the x-area is
  // (1/2) int (r2^{2/alpha} - r1^{2/alpha}) dphi.
  const double R = std::pow(p.delta, p.alpha);
  const double e = 2.0 / p.alpha;
  const int n = 4096;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * pi * (k + 0.5) / n;
    const double proj = (std::conj(p.b) * std::polar(1.0, phi)).real();
    const double disc = proj * proj - std::norm(p.b) + R * R;
    if (disc <= 0.0) continue;
    const double r2 = proj + std::sqrt(disc);
    const double r1 = std::abs(p.b) < R ? 0.0 : proj - std::sqrt(disc);
    if (r2 <= 0.0) continue;
    sum += std::pow(r2, e) - std::pow(std::max(r1, 0.0), e);
  }
  return 0.5 * sum * 2.0 * pi / n;
}

void check_resolution(const BubbleParams& p, const Discretization& disc, const ResolutionCheck& check) {
  const double da = std::pow(p.delta, p.alpha);
  std::size_t inside = 0;
  for (const Complex x : disc.nodes())
    if (std::abs(ipow(x, p.alpha) - p.b) <= da) ++inside;
  // Node count of a mesh with spacing delta/m over the region.
  const double h = p.delta / check.min_nodes_per_delta;
  const double needed = 2.0 / std::sqrt(3.0) * concentration_area(p) / (h * h);
  if (static_cast<double>(inside) < needed)
    throw ResolutionError("bubble unresolved: " + std::to_string(inside) + " nodes in the concentration region, need " +
                          std::to_string(static_cast<long>(needed)));
  for (const Complex beta : p.roots)
    if (disc.domain().radial_fraction(beta) >= 1.0) throw DomainError("bubble: a root of b lies outside the domain");
}

namespace {

Projection project(const Discretization& disc, const std::function<double(Complex)>& v,
                   const std::function<double(Complex)>& source) {
  const auto extension = disc.domain().extend(v);
  const Eigen::VectorXd ext_qp = discretization::sample_qp(disc, [&](Complex x) { return extension(x); });
  const Eigen::VectorXd ext_nodes = discretization::sample_nodes(disc, [&](Complex x) { return extension(x); });
  const Eigen::VectorXd v_qp = discretization::sample_qp(disc, v);
  const Eigen::VectorXd v_nodes = discretization::sample_nodes(disc, v);
  Field field(disc, v_nodes - ext_nodes, v_qp - ext_qp, discretization::sample_qp(disc, source));
  return Projection{std::move(field), ext_qp, std::nullopt};
}

}  // namespace

Projection project_bubble(const BubbleParams& p, const Discretization& disc, bool with_expansion_residual,
                          const ResolutionCheck& check) {
  check_resolution(p, disc, check);
  Projection pw = project(disc, [&](Complex x) { return bubble_eval(p, x); },
                          [&](Complex x) { return weight_eval(p, x); });
  if (with_expansion_residual) {
    const double a = p.alpha;
    const double shift = std::log(8.0 * a * a * p.delta_2a());
    const auto& dom = disc.domain();
    const Eigen::VectorXd gap = discretization::sample_nodes(disc, [&](Complex x) {
      double robin = 0.0;
      for (const Complex beta : p.roots) robin += dom.regular_part(x, beta);
      return bubble_eval(p, x) - shift + 8.0 * pi * robin;
    });
    pw.expansion_residual = (pw.field.nodal() - gap).cwiseAbs().maxCoeff();
  }
  return pw;
}

Projection project_kernel(const BubbleParams& p, int j, const Discretization& disc, bool with_expansion_residual,
                          const ResolutionCheck& check) {
  if (j < 0 || j > 2) throw ArgumentError("project_kernel: j must be 0, 1 or 2");
  check_resolution(p, disc, check);
  Projection pz = project(disc, [&](Complex x) { return kernel_eval(p, j, x); },
                          [&](Complex x) { return weight_eval(p, x) * kernel_eval(p, j, x); });
  if (with_expansion_residual) {
    const double offset = j == 0 ? 1.0 : 0.0;
    const Eigen::VectorXd model =
        discretization::sample_nodes(disc, [&](Complex x) { return kernel_eval(p, j, x) + offset; });
    Eigen::VectorXd gap = pz.field.nodal() - model;
    pz.expansion_residual = gap.cwiseAbs().maxCoeff();
  }
  return pz;
}

Eigen::VectorXd nonlinear_weight_qp(const BubbleParams& p, double lambda, const Eigen::VectorXd& potential_qp,
                                    const Projection& pw, const Discretization& disc) {
  const Eigen::VectorXd w = discretization::sample_qp(disc, [&](Complex x) { return weight_eval(p, x); });
  return lambda * potential_qp.cwiseProduct(w).cwiseProduct((-pw.extension_qp).array().exp().matrix());
}

Residual residual_R(const BubbleParams& p, double lambda, const Eigen::VectorXd& potential_qp,
                    const Eigen::VectorXd& potential_nodes, const Projection& pw, const Discretization& disc,
                    double lp) {
  Residual r;
  const Eigen::VectorXd w = discretization::sample_qp(disc, [&](Complex x) { return weight_eval(p, x); });
  const Eigen::VectorXd nl = nonlinear_weight_qp(p, lambda, potential_qp, pw, disc);
  r.qp = w - nl;
  const Eigen::VectorXd w_nodes = discretization::sample_nodes(disc, [&](Complex x) { return weight_eval(p, x); });
  const Eigen::VectorXd W_nodes = discretization::sample_nodes(disc, [&](Complex x) { return bubble_eval(p, x); });
  // E(W) = W - PW at nodes; PW vanishes on the boundary so E = W there.
  const Eigen::VectorXd ext_nodes = W_nodes - pw.field.nodal();
  r.nodal = w_nodes - lambda * potential_nodes.cwiseProduct(w_nodes).cwiseProduct((-ext_nodes).array().exp().matrix());
  r.lp_norm = discretization::lp_norm_qp(disc, r.qp, lp);
  r.integral = discretization::integrate(disc, r.qp);
  r.solution_mass = discretization::integrate(disc, nl);
  return r;
}

Residual residual_R(const BubbleParams& p, double lambda, const geometry::PotentialModel& pot,
                    const geometry::KernelData& kernels, const Discretization& disc, double lp) {
  const Projection pw = project_bubble(p, disc);
  return residual_R(p, lambda, sample_potential_qp(pot, kernels, disc),
                    discretization::sample_nodes(disc, [&](Complex x) { return potential_V(pot, kernels, x); }), pw,
                    disc, lp);
}

}  // namespace liouville::bubble
