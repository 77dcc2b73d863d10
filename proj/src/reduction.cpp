#include "liouville/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "liouville/quadrature.hpp"

namespace liouville::reduction {

using bubble::BubbleParams;
using bubble::Projection;

std::string to_string(TheoremCase c) {
  switch (c) {
    case TheoremCase::thm1: return "thm1";
    case TheoremCase::thm2: return "thm2";
    case TheoremCase::none: return "none";
  }
  return "none";
}

double constant_A(const geometry::PotentialModel& pot, const geometry::KernelData& kernels) {
  if (kernels.holo_dx.size() < 2) throw ArgumentError("constant_A: derivative data missing");
  const double alpha = kernels.alpha;
  return 4.0 * pi * pi * (alpha + 1.0) * (alpha + 1.0) * std::norm(kernels.holo_dx[1]) -
         (pot.a11() + pot.a22()) / (4.0 * pot.a0());
}

AssumptionReport check_assumptions(const geometry::PotentialModel& pot, const geometry::KernelData& kernels, int N,
                                   double tol) {
  if (N < 1) throw ArgumentError("check_assumptions: N must be >= 1");
  const int alpha = N + 1;
  if (kernels.alpha != alpha) throw ArgumentError("check_assumptions: kernel data built for a different alpha");
  AssumptionReport r;
  const Complex grad_h = kernels.grad_origin();
  r.gradient_condition_residual = std::abs(pot.grad() + 4.0 * pi * (N + 2) * pot.a0() * grad_h);
  r.A_value = constant_A(pot, kernels);
  const auto& dom = kernels.domain;
  if (dom.kind() != geometry::DomainKind::curve) {
    r.symmetry_ok = true;
  } else if (auto order = dom.symmetry_order(); order && *order >= 3) {
    r.symmetry_ok = geometry::symmetry_check(dom, *order);
  }
  const double scale = std::max(1.0, std::abs(pot.a0()));
  if (alpha >= 3) {
    if (r.gradient_condition_residual > tol * scale) r.warnings.push_back("gradient condition fails");
    if (std::abs(r.A_value) <= tol) r.warnings.push_back("A vanishes");
    if (r.warnings.empty()) r.theorem_case = TheoremCase::thm1;
  } else if (alpha == 2) {
    if (!r.symmetry_ok) r.warnings.push_back("domain lacks rotational symmetry of order >= 3");
    if (std::abs(pot.grad()) > tol * scale) r.warnings.push_back("grad a(0) != 0");
    if (std::abs(pot.a11() + pot.a22()) <= tol * scale) r.warnings.push_back("Laplacian of a vanishes at 0");
    if (std::abs(pot.a11() - pot.a22()) > tol * scale) r.warnings.push_back("a11 != a22");
    if (r.warnings.empty()) r.theorem_case = TheoremCase::thm2;
  } else {
    r.warnings.push_back("alpha = 1 is covered by neither theorem");
  }
  return r;
}

ReducedMapValue reduced_map_F(Complex B, int alpha, double tol, bool with_jacobian) {
  if (alpha < 2) throw ArgumentError("reduced_map_F: alpha must be >= 2");
  if (std::abs(B) > 2.0 + 1e-12) throw ArgumentError("reduced_map_F: |B| must be <= 2");
  ReducedMapValue v;
  const quadrature::DecayProfile decay_F{3.0 * alpha, alpha > 2};
  auto run = [&](auto&& integrand, quadrature::DecayProfile decay) {
    const auto r = quadrature::integrate_plane(integrand, decay, tol);
    v.error_estimate = std::max(v.error_estimate, r.error_estimate);
    return r.value;
  };
  auto shifted = [&](Complex y) { return ipow(y, alpha) - B; };
  v.F[0] = run([&](Complex y) {
    const Complex z = shifted(y);
    return std::pow(std::norm(y), alpha) * z.real() / std::pow(1.0 + std::norm(z), 3);
  }, decay_F);
  v.F[1] = run([&](Complex y) {
    const Complex z = shifted(y);
    return std::pow(std::norm(y), alpha) * z.imag() / std::pow(1.0 + std::norm(z), 3);
  }, decay_F);
  if (!with_jacobian) return v;
  const quadrature::DecayProfile decay_J{4.0 * alpha, alpha > 2};
  v.J[0][0] = run([&](Complex y) {
    const Complex z = shifted(y);
    const double q = std::norm(z);
    return std::pow(std::norm(y), alpha) * (6.0 * z.real() * z.real() - 1.0 - q) / std::pow(1.0 + q, 4);
  }, decay_J);
  v.J[1][1] = run([&](Complex y) {
    const Complex z = shifted(y);
    const double q = std::norm(z);
    return std::pow(std::norm(y), alpha) * (6.0 * z.imag() * z.imag() - 1.0 - q) / std::pow(1.0 + q, 4);
  }, decay_J);
  v.J[0][1] = run([&](Complex y) {
    const Complex z = shifted(y);
    return std::pow(std::norm(y), alpha) * 6.0 * z.real() * z.imag() / std::pow(1.0 + std::norm(z), 4);
  }, decay_J);
  v.J[1][0] = v.J[0][1];
  return v;
}

double jacobian_at_zero(int alpha, double tol) {
  if (alpha < 2) throw ArgumentError("jacobian_at_zero: alpha must be >= 2");
  const auto r = quadrature::integrate_plane(
      [alpha](Complex y) {
        const double r2 = std::norm(y);
        return std::pow(r2, 1.0 / alpha) * (2.0 * r2 - 1.0) / std::pow(1.0 + r2, 4);
      },
      {8.0 - 2.0 - 2.0 / alpha, true}, tol);
  return r.value / alpha;
}

namespace {

Eigen::VectorXd weight_qp(const BubbleParams& p, const discretization::Discretization& disc) {
  return discretization::sample_qp(disc, [&](Complex x) { return bubble::weight_eval(p, x); });
}

double part_of(Complex z, Part part) { return part == Part::re ? z.real() : z.imag(); }

}  // namespace

double moment_integral(const BubbleParams& p, const Projection& pz, int gamma, Complex xi, Part part) {
  if (gamma < 0 || gamma > p.alpha) throw ArgumentError("moment_integral: gamma must lie in 0..alpha");
  const auto& disc = pz.field.disc();
  const Eigen::VectorXd test =
      discretization::sample_qp(disc, [&](Complex x) { return part_of(xi * ipow(x, gamma), part); });
  return discretization::integrate(disc, weight_qp(p, disc).cwiseProduct(pz.field.qp()).cwiseProduct(test));
}

double moment_leading_term(const BubbleParams& p, int j, Complex xi, Part part) {
  const double c = 4.0 * pi * p.alpha * p.alpha * std::pow(p.delta, p.alpha);
  if (j == 1) return c * (part == Part::re ? xi.real() : xi.imag());
  if (j == 2) return c * (part == Part::re ? -xi.imag() : xi.real());
  throw ArgumentError("moment_leading_term: j must be 1 or 2");
}

double quadratic_moment_integral(const BubbleParams& p, const Projection& pz, Complex xi1, Complex xi2, Part part) {
  const auto& disc = pz.field.disc();
  const Eigen::VectorXd test = discretization::sample_qp(
      disc, [&](Complex x) { return part_of(xi1 * x, part) * part_of(xi2 * x, part); });
  return discretization::integrate(disc, weight_qp(p, disc).cwiseProduct(pz.field.qp()).cwiseProduct(test));
}

double quadratic_moment_model(const BubbleParams& p, int j, Complex xi1, Complex xi2) {
  if (j != 1 && j != 2) throw ArgumentError("quadratic_moment_model: j must be 1 or 2");
  const double inner = (xi1 * std::conj(xi2)).real();
  const Complex B = p.b / std::pow(p.delta, p.alpha);
  const auto F = reduced_map_F(B, p.alpha, 1e-11, false).F;
  const double a = p.alpha;
  return 0.5 * p.delta * p.delta * inner * 8.0 * a * a * F[j - 1];
}

double quadratic_moment_correction(const BubbleParams& p, int j, Complex xi1, Complex xi2, Part part) {
  const double c = 2.0 * pi * p.alpha * p.alpha * p.delta * p.delta;
  const Complex prod = xi1 * xi2;
  if (j == 1) return part == Part::re ? c * prod.real() : -c * prod.real();
  if (j == 2) return part == Part::re ? -c * prod.imag() : c * prod.imag();
  throw ArgumentError("quadratic_moment_correction: j must be 1 or 2");
}

MultiplierForm multiplier_leading_form(const BubbleParams& p, double lambda, double A,
                                       const Eigen::VectorXd& potential_qp, const Projection& pw,
                                       const Projection& pz, int j) {
  if (j != 1 && j != 2) throw ArgumentError("multiplier_leading_form: j must be 1 or 2");
  const auto& disc = pz.field.disc();
  const Eigen::VectorXd w = weight_qp(p, disc);
  const Eigen::VectorXd nl = bubble::nonlinear_weight_qp(p, lambda, potential_qp, pw, disc);
  MultiplierForm m;
  m.computed = discretization::integrate(disc, (w - nl).cwiseProduct(pz.field.qp()));
  const Complex B = p.b / std::pow(p.delta, p.alpha);
  const auto F = reduced_map_F(B, p.alpha, 1e-11, false).F;
  m.model = 8.0 * p.alpha * p.alpha * A * p.delta * p.delta * F[j - 1];
  return m;
}

MultiplierForm multiplier_leading_form(const BubbleParams& p, double lambda, const geometry::PotentialModel& pot,
                                       const geometry::KernelData& kernels,
                                       const discretization::Discretization& disc, int j) {
  const Projection pw = bubble::project_bubble(p, disc);
  const Projection pz = bubble::project_kernel(p, j, disc);
  return multiplier_leading_form(p, lambda, constant_A(pot, kernels), bubble::sample_potential_qp(pot, kernels, disc),
                                 pw, pz, j);
}

// ---------------------------------------------------------------------------
// Root search

namespace {

double norm2(const std::array<double, 2>& c) { return std::hypot(c[0], c[1]); }

std::vector<std::array<double, 4>> rows(const std::vector<ScanSample>& samples) {
  std::vector<std::array<double, 4>> out;
  for (const auto& s : samples) out.push_back({s.b.real(), s.b.imag(), s.c[0], s.c[1]});
  return out;
}

}  // namespace

RootResult solve_for_b(const MultiplierMap& map, double delta, int alpha, const RootSearchOptions& options,
                       Complex warm_start) {
  if (!(delta > 0.0)) throw ArgumentError("solve_for_b: delta must be positive");
  if (options.circle_samples < 4) throw ArgumentError("solve_for_b: need at least 4 circle samples");
  RootResult result;
  const double radius = options.search_radius_factor * std::pow(delta, alpha);
  const double tol_c = options.tol_c > 0.0 ? options.tol_c : 1e-9 * (2.0 / 3.0) * pi * alpha;
  auto eval = [&](Complex b) {
    ++result.evaluations;
    return map(b);
  };

  // Boundary circle, keyed by angle so refinement keeps the samples ordered.
  std::map<double, ScanSample> circle;
  for (int k = 0; k < options.circle_samples; ++k) {
    const double t = 2.0 * pi * k / options.circle_samples;
    const Complex b = std::polar(radius, t);
    circle[t] = {b, eval(b)};
  }
  auto angle_of = [](const std::array<double, 2>& c) { return std::atan2(c[1], c[0]); };
  auto wrap = [](double d) { return std::remainder(d, 2.0 * pi); };
  double winding_sum = 0.0;
  for (int level = 0;; ++level) {
    bool refined = false;
    winding_sum = 0.0;
    std::vector<std::pair<double, double>> coarse_arcs;
    for (auto it = circle.begin(); it != circle.end(); ++it) {
      auto next = std::next(it);
      const double t_next = next == circle.end() ? circle.begin()->first + 2.0 * pi : next->first;
      const auto& c_next = next == circle.end() ? circle.begin()->second.c : next->second.c;
      const double jump = wrap(angle_of(c_next) - angle_of(it->second.c));
      winding_sum += jump;
      if (std::abs(jump) > 0.5 * pi) coarse_arcs.emplace_back(it->first, t_next);
    }
    if (coarse_arcs.empty() || level >= options.max_refinements) {
      if (!coarse_arcs.empty()) {
        result.circle.clear();
        for (const auto& [t, s] : circle) result.circle.push_back(s);
        throw RootNotFoundError("solve_for_b: multiplier angle not resolved on the search circle", rows(result.circle));
      }
      break;
    }
    for (const auto& [a, b] : coarse_arcs) {
      const double t = 0.5 * (a + b);
      const Complex bb = std::polar(radius, t);
      circle[std::fmod(t, 2.0 * pi)] = {bb, eval(bb)};
      refined = true;
    }
    if (!refined) break;
  }
  for (const auto& [t, s] : circle) result.circle.push_back(s);
  result.winding = static_cast<int>(std::lround(winding_sum / (2.0 * pi)));
  result.min_circle_norm = 1e300;
  for (const auto& s : result.circle) result.min_circle_norm = std::min(result.min_circle_norm, norm2(s.c));

  const double floor = std::max(10.0 * tol_c, options.degeneracy_floor * delta * delta);
  if (result.min_circle_norm < floor)
    throw RootNotFoundError("solve_for_b: multiplier map degenerate on the search circle (min |c| = " +
                                std::to_string(result.min_circle_norm) + ")",
                            rows(result.circle));
  if (result.winding <= 0)
    throw RootNotFoundError("solve_for_b: no degree evidence (winding " + std::to_string(result.winding) + ")",
                            rows(result.circle));

  auto clip = [&](Complex b) { return std::abs(b) > radius ? b * (radius / std::abs(b)) : b; };
  auto newton = [&](Complex b, std::array<double, 2> c) -> std::optional<std::pair<Complex, std::array<double, 2>>> {
    const double h = 1e-3 * radius;
    for (int it = 0; it < options.max_newton; ++it) {
      if (norm2(c) <= tol_c) return std::make_pair(b, c);
      ++result.newton_iterations;
      const auto c1 = eval(b + h), c2 = eval(b + Complex(0.0, h));
      const double j11 = (c1[0] - c[0]) / h, j21 = (c1[1] - c[1]) / h;
      const double j12 = (c2[0] - c[0]) / h, j22 = (c2[1] - c[1]) / h;
      const double det = j11 * j22 - j12 * j21;
      if (!(std::abs(det) > 0.0)) return std::nullopt;
      Complex step((-j22 * c[0] + j12 * c[1]) / det, (j21 * c[0] - j11 * c[1]) / det);
      bool improved = false;
      for (int damp = 0; damp < 5; ++damp) {
        const Complex trial = clip(b + step);
        const auto ct = eval(trial);
        if (norm2(ct) < norm2(c)) {
          b = trial;
          c = ct;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) return std::nullopt;
    }
    if (norm2(c) <= tol_c) return std::make_pair(b, c);
    return std::nullopt;
  };

  Complex start = clip(warm_start);
  if (auto found = newton(start, eval(start))) {
    result.b = found->first;
    result.c = found->second;
    return result;
  }
  // Polar grid fallback: restart from the best interior sample.
  ScanSample best{0.0, eval(0.0)};
  for (double frac : {0.25, 0.5, 0.75})
    for (int k = 0; k < options.circle_samples; ++k) {
      const Complex b = std::polar(frac * radius, 2.0 * pi * k / options.circle_samples);
      const auto c = eval(b);
      if (norm2(c) < norm2(best.c)) best = {b, c};
    }
  if (auto found = newton(best.b, best.c)) {
    result.b = found->first;
    result.c = found->second;
    return result;
  }
  throw RootNotFoundError("solve_for_b: Newton failed to reach the multiplier tolerance", rows(result.circle));
}

}  // namespace liouville::reduction
