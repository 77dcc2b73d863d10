#include <cmath>

#include <gtest/gtest.h>

#include "liouville/quadrature.hpp"
#include "liouville/reduction.hpp"

using namespace liouville;
using reduction::Part;
using reduction::TheoremCase;

namespace {

// Diagonal of DF(0) by Beta functions: with
// 2 pi int rho^{1+s} (1+rho^2)^{-k} = pi B(1 + s/2, k - 1 - s/2),
// (1/alpha) int |y|^{2/alpha} (2|y|^2 - 1)/(1+|y|^2)^4
//   = (pi/alpha) [2 B(2 + 1/alpha, 2 - 1/alpha) - B(1 + 1/alpha, 3 - 1/alpha)].
double jacobian_oracle(int alpha) {
  const double t = 1.0 / alpha;
  return pi / alpha * (2.0 * std::beta(2.0 + t, 2.0 - t) - std::beta(1.0 + t, 3.0 - t));
}

geometry::KernelData kernels_for(const geometry::DomainModel& d, int alpha) {
  return geometry::holomorphic_derivatives(d, alpha + 1, alpha);
}

}  // namespace

TEST(Assumptions, TheoremCasesOnTheDisk) {
  const auto disk = geometry::DomainModel::unit_disk();
  const auto bowl = geometry::PotentialModel::quadratic(1.0, 0.0, 1.0, 1.0);
  const auto flat = geometry::PotentialModel::quadratic(1.0, 0.0, 0.0, 0.0);
  auto r = reduction::check_assumptions(bowl, kernels_for(disk, 3), 2);
  EXPECT_EQ(r.theorem_case, TheoremCase::thm1);
  EXPECT_NEAR(r.A_value, -0.5, 1e-12);
  EXPECT_LE(r.gradient_condition_residual, 1e-12);
  r = reduction::check_assumptions(bowl, kernels_for(disk, 2), 1);
  EXPECT_EQ(r.theorem_case, TheoremCase::thm2);
  EXPECT_TRUE(r.symmetry_ok);
  EXPECT_EQ(reduction::check_assumptions(flat, kernels_for(disk, 3), 2).theorem_case, TheoremCase::none);
  EXPECT_EQ(reduction::check_assumptions(flat, kernels_for(disk, 2), 1).theorem_case, TheoremCase::none);
  EXPECT_THROW(reduction::check_assumptions(bowl, kernels_for(disk, 2), 0), ArgumentError);
}

TEST(Assumptions, GradientAndSymmetryConditions) {
  const auto ellipse = geometry::DomainModel::curve(geometry::BoundaryCurve::ellipse(1.0, 0.7));
  const auto bowl = geometry::PotentialModel::quadratic(1.0, 0.0, 1.0, 1.0);
  // Central symmetry alone gives grad H(0,0) = 0, enough for alpha >= 3 but not for alpha = 2.
  EXPECT_EQ(reduction::check_assumptions(bowl, kernels_for(ellipse, 3), 2).theorem_case, TheoremCase::thm1);
  EXPECT_EQ(reduction::check_assumptions(bowl, kernels_for(ellipse, 2), 1).theorem_case, TheoremCase::none);
  const auto tilted = geometry::PotentialModel::quadratic(1.0, Complex(0.3, 0.0), 1.0, 1.0);
  const auto r = reduction::check_assumptions(tilted, kernels_for(geometry::DomainModel::unit_disk(), 3), 2);
  EXPECT_EQ(r.theorem_case, TheoremCase::none);
  EXPECT_NEAR(r.gradient_condition_residual, 0.3, 1e-12);
  const auto anisotropic = geometry::PotentialModel::quadratic(1.0, 0.0, 1.0, 2.0);
  EXPECT_EQ(reduction::check_assumptions(anisotropic, kernels_for(geometry::DomainModel::unit_disk(), 2), 1)
                .theorem_case,
            TheoremCase::none);
  EXPECT_EQ(reduction::to_string(TheoremCase::thm2), "thm2");
}

TEST(ConstantA, DiskAndRescaledPotential) {
  const auto disk = geometry::DomainModel::unit_disk();
  EXPECT_NEAR(reduction::constant_A(geometry::PotentialModel::quadratic(1.0, 0.0, 1.0, 1.0), kernels_for(disk, 2)),
              -0.5, 1e-14);
  // A is invariant under a -> c a.
  EXPECT_NEAR(reduction::constant_A(geometry::PotentialModel::quadratic(3.0, 0.0, 3.0, 3.0), kernels_for(disk, 3)),
              -0.5, 1e-14);
}

TEST(ReducedMap, VanishesAtZeroWithScalarJacobian) {
  for (int alpha = 2; alpha <= 4; ++alpha) {
    const auto v = reduction::reduced_map_F(0.0, alpha);
    EXPECT_LE(std::abs(v.F[0]), 1e-10);
    EXPECT_LE(std::abs(v.F[1]), 1e-10);
    EXPECT_NEAR(v.J[0][0], v.J[1][1], 1e-9);
    EXPECT_LE(std::abs(v.J[0][1]), 1e-10);
    EXPECT_LE(std::abs(v.J[1][0]), 1e-10);
    EXPECT_NEAR(v.J[0][0], reduction::jacobian_at_zero(alpha), 1e-9);
  }
  EXPECT_THROW(reduction::reduced_map_F(0.0, 1), ArgumentError);
}

TEST(ReducedMap, JacobianAtZeroMatchesBetaOracle) {
  EXPECT_NEAR(jacobian_oracle(2), pi * pi / 32.0, 1e-15);
  EXPECT_NEAR(reduction::jacobian_at_zero(2), pi * pi / 32.0, 1e-8);
  for (int alpha = 2; alpha <= 8; ++alpha) {
    EXPECT_NEAR(reduction::jacobian_at_zero(alpha), jacobian_oracle(alpha), 1e-8) << alpha;
    EXPECT_GT(reduction::jacobian_at_zero(alpha), 0.0) << alpha;
  }
}

TEST(ReducedMap, JacobianMatchesFiniteDifferences) {
  const int alpha = 3;
  const Complex B(0.4, -0.3);
  const auto v = reduction::reduced_map_F(B, alpha);
  const double h = 1e-4;
  for (int k = 0; k < 2; ++k) {
    const Complex dir = k == 0 ? Complex(h, 0.0) : Complex(0.0, h);
    const auto plus = reduction::reduced_map_F(B + dir, alpha, 1e-12, false);
    const auto minus = reduction::reduced_map_F(B - dir, alpha, 1e-12, false);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(v.J[i][k], (plus.F[i] - minus.F[i]) / (2.0 * h), 1e-6);
  }
}

TEST(ReducedMap, BalancedRationalIntegral) {
  const auto r = quadrature::integrate_plane(
      [](Complex y) { return (2.0 * std::norm(y) - 1.0) / std::pow(1.0 + std::norm(y), 4); }, {6.0, false}, 1e-12);
  EXPECT_LE(std::abs(r.value), 1e-10);
}

TEST(Moments, LeadingMomentMatchesWholePlaneOracle) {
  const int alpha = 3;
  const double delta = 0.1;
  const auto p = bubble::BubbleParams::make(alpha, delta);
  const auto disc =
      discretization::build(geometry::DomainModel::unit_disk(), discretization::Resolution::for_bubble(delta));
  const Complex xi(0.6, -0.8);
  for (int j = 1; j <= 2; ++j) {
    const auto pz = bubble::project_kernel(p, j, disc);
    for (Part part : {Part::re, Part::im}) {
      auto test_fn = [&](Complex x) {
        const Complex m = xi * ipow(x, alpha);
        return part == Part::re ? m.real() : m.imag();
      };
      const double oracle = quadrature::integrate_plane(
                                [&](Complex x) { return bubble::weight_eval(p, x) * bubble::kernel_eval(p, j, x) * test_fn(x); },
                                {2.0 * alpha + 2.0, true}, 1e-12)
                                .value;
      const double measured = reduction::moment_integral(p, pz, alpha, xi, part);
      EXPECT_NEAR(measured / oracle, 1.0, 0.03) << j;
      // The sign pattern agrees with the stated table.
      EXPECT_GT(measured * reduction::moment_leading_term(p, j, xi, part), 0.0) << j;
      // Change of variables z = x^alpha: the whole-plane value is 2 pi alpha delta^alpha times the table entry.
      EXPECT_NEAR(oracle, 2.0 * pi * alpha * std::pow(delta, alpha) *
                              reduction::moment_leading_term(p, j, xi, part) /
                              (4.0 * pi * alpha * alpha * std::pow(delta, alpha)),
                  1e-8);
    }
  }
}

TEST(Moments, LowOrderMomentsAreSmall) {
  const int alpha = 3;
  const auto p = bubble::BubbleParams::make(alpha, 0.1);
  const auto disc =
      discretization::build(geometry::DomainModel::unit_disk(), discretization::Resolution::for_bubble(0.1));
  const auto pz = bubble::project_kernel(p, 1, disc);
  const double lead = std::abs(reduction::moment_integral(p, pz, alpha, 1.0, Part::re));
  for (int gamma = 1; gamma < alpha; ++gamma)
    EXPECT_LE(std::abs(reduction::moment_integral(p, pz, gamma, Complex(1.0, 0.5), Part::re)), 1e-3 * lead);
}

TEST(MultiplierForm, VanishesAtZeroAndTracksModel) {
  const int alpha = 3;
  const double lambda = 1e-3;
  const auto disk = geometry::DomainModel::unit_disk();
  const auto kernels = kernels_for(disk, alpha);
  const auto pot = geometry::PotentialModel::quadratic(1.0, 0.0, 1.0, 1.0);
  const double delta = bubble::delta_from_lambda(lambda, 0.0, pot, kernels, alpha);
  const auto disc = discretization::build(disk, discretization::Resolution::for_bubble(delta));
  for (int j = 1; j <= 2; ++j) {
    const auto at_zero =
        reduction::multiplier_leading_form(bubble::BubbleParams::make(alpha, delta), lambda, pot, kernels, disc, j);
    EXPECT_LE(std::abs(at_zero.computed), 1e-10);
    EXPECT_LE(std::abs(at_zero.model), 1e-10);
  }
  const Complex B = std::polar(0.5, 0.7);
  const Complex b = B * std::pow(delta, alpha);
  const double delta_b = bubble::delta_from_lambda(lambda, b, pot, kernels, alpha);
  for (int j = 1; j <= 2; ++j) {
    const auto f =
        reduction::multiplier_leading_form(bubble::BubbleParams::make(alpha, delta_b, b), lambda, pot, kernels, disc, j);
    EXPECT_NEAR(f.computed / f.model, 1.0, 0.15) << j;
  }
}

TEST(SolveForB, LinearMapRootIsFound) {
  const double delta = 0.1;
  const int alpha = 3;
  const double scale = std::pow(delta, alpha);
  const Complex root(0.3 * scale, -0.2 * scale);
  // c = kappa delta^2 M (b - root)/delta^alpha with M a rotation-scaling (degree +1).
  const reduction::MultiplierMap map = [&](Complex b) {
    const Complex z = Complex(1.0, 0.4) * (b - root) / scale * 0.5 * delta * delta;
    return std::array<double, 2>{z.real(), z.imag()};
  };
  const auto r = reduction::solve_for_b(map, delta, alpha);
  EXPECT_EQ(r.winding, 1);
  EXPECT_LE(std::abs(r.b - root), 1e-8 * scale);
  EXPECT_GT(r.evaluations, 0);
  EXPECT_GE(r.circle.size(), 12u);
}

TEST(SolveForB, NonlinearMapNearTheoremModel) {
  const double delta = 0.1;
  const int alpha = 3;
  const double scale = std::pow(delta, alpha);
  // The model form 8 alpha^2 A delta^2 F(B), A < 0.
  const reduction::MultiplierMap map = [&](Complex b) {
    const auto v = reduction::reduced_map_F(b / scale, alpha, 1e-11, false);
    const double k = 8.0 * alpha * alpha * -0.5 * delta * delta;
    return std::array<double, 2>{k * v.F[0], k * v.F[1]};
  };
  const auto r = reduction::solve_for_b(map, delta, alpha, {}, Complex(0.2 * scale, 0.1 * scale));
  EXPECT_EQ(r.winding, 1);
  EXPECT_LE(std::abs(r.b), 1e-8 * scale);
}

TEST(SolveForB, DegenerateMapIsRejected) {
  const double delta = 0.1;
  const reduction::MultiplierMap tiny = [&](Complex b) {
    return std::array<double, 2>{1e-6 * delta * delta * b.real(), 1e-6 * delta * delta * b.imag()};
  };
  try {
    reduction::solve_for_b(tiny, delta, 3);
    FAIL();
  } catch (const RootNotFoundError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate"), std::string::npos);
    EXPECT_FALSE(e.scan.empty());
  }
}

TEST(SolveForB, NoDegreeEvidenceIsRejected) {
  const double delta = 0.1;
  const double scale = std::pow(delta, 3);
  // Zero outside the search disk: winding 0.
  const reduction::MultiplierMap shifted = [&](Complex b) {
    const Complex z = (b - 5.0 * scale) / scale * delta * delta;
    return std::array<double, 2>{z.real(), z.imag()};
  };
  EXPECT_THROW(reduction::solve_for_b(shifted, delta, 3), RootNotFoundError);
  // Orientation reversing: winding -1.
  const reduction::MultiplierMap reflected = [&](Complex b) {
    const Complex z = std::conj(b) / scale * delta * delta;
    return std::array<double, 2>{z.real(), z.imag()};
  };
  EXPECT_THROW(reduction::solve_for_b(reflected, delta, 3), RootNotFoundError);
}
