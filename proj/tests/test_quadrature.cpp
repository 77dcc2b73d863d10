#include <cmath>
#include <cstdlib>

#include <gtest/gtest.h>

#include "liouville/parallel.hpp"
#include "liouville/quadrature.hpp"

using namespace liouville;
using quadrature::DecayProfile;

namespace {

// 2 pi int_0^inf rho^{1+s} (1+rho^2)^{-k} d rho = pi B(1 + s/2, k - 1 - s/2).
double radial_beta(double s, double k) { return pi * std::beta(1.0 + s / 2.0, k - 1.0 - s / 2.0); }

}  // namespace

TEST(IntegratePlane, RationalProfileMatchesBetaOracle) {
  const auto r = quadrature::integrate_plane([](Complex y) { return std::pow(1.0 + std::norm(y), -3); },
                                             DecayProfile{6.0, false}, 1e-10);
  EXPECT_NEAR(r.value, radial_beta(0.0, 3.0), 1e-10);
  EXPECT_NEAR(r.value, pi / 2.0, 1e-10);
  EXPECT_GE(r.error_estimate, 0.0);
  EXPECT_GT(r.cells_used, 0u);
}

TEST(IntegratePlane, OddIntegrandVanishes) {
  const double tol = 1e-10;
  const auto r = quadrature::integrate_plane(
      [](Complex y) { return y.real() / std::pow(1.0 + std::norm(y), 3); }, DecayProfile{5.0, false}, tol);
  EXPECT_LE(std::abs(r.value), tol);
  const auto r2 = quadrature::integrate_plane(
      [](Complex y) { return y.real() * y.imag() * y.imag() / std::pow(1.0 + std::norm(y), 4); },
      DecayProfile{5.0, false}, tol);
  EXPECT_LE(std::abs(r2.value), tol);
}

TEST(IntegratePlane, BalancedRationalIntegralIsZero) {
  const auto r = quadrature::integrate_plane(
      [](Complex y) { return (2.0 * std::norm(y) - 1.0) / std::pow(1.0 + std::norm(y), 4); },
      DecayProfile{6.0, false}, 1e-12);
  EXPECT_LE(std::abs(r.value), 1e-10);
}

TEST(IntegratePlane, RejectsNonIntegrableDecay) {
  EXPECT_THROW(quadrature::integrate_plane([](Complex) { return 1.0; }, DecayProfile{2.0, false}, 1e-8),
               ArgumentError);
  EXPECT_THROW(quadrature::integrate_plane([](Complex) { return 1.0; }, DecayProfile{4.0, false}, 0.0),
               ArgumentError);
}

TEST(IntegratePlane, RefinementLimitCarriesPartialValue) {
  quadrature::PlaneOptions opts;
  opts.max_cells = 40;
  try {
    quadrature::integrate_plane([](Complex y) { return std::pow(1.0 + std::norm(y), -3) * std::cos(40.0 * y.real()); },
                                DecayProfile{6.0, false}, 1e-14, opts);
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_TRUE(std::isfinite(e.partial_value));
    EXPECT_GT(e.error_estimate, 0.0);
  }
}

TEST(IntegratePlane, TighterToleranceNeverWorsensRadialErrors) {
  struct Case {
    double k, s;
  };
  for (const Case c : {Case{3.0, 0.0}, Case{4.0, 2.0}, Case{5.0, 1.0}}) {
    const double oracle = radial_beta(c.s, c.k);
    auto f = [&](Complex y) { return std::pow(std::norm(y), c.s / 2.0) * std::pow(1.0 + std::norm(y), -c.k); };
    const DecayProfile decay{2.0 * c.k - c.s, c.s != 0.0};
    double previous = 1e300;
    for (double tol : {1e-6, 5e-7, 2.5e-7, 1.25e-7}) {
      const double err = std::abs(quadrature::integrate_plane(f, decay, tol).value - oracle);
      EXPECT_LE(err, previous * (1.0 + 1e-12) + 1e-15) << "k=" << c.k << " tol=" << tol;
      previous = err;
    }
  }
}

TEST(IntegratePlane, AgreesWithRadialIntegrator) {
  for (double k : {3.0, 3.5, 4.0}) {
    for (double s : {0.0, 1.0, 2.0}) {
      auto g = [k](double rho) { return std::pow(1.0 + rho * rho, -k); };
      const auto [radial, radial_err] = quadrature::integrate_radial_with_error(g, s, 1e-13);
      const auto plane = quadrature::integrate_plane(
          [&](Complex y) { return std::pow(std::abs(y), s) * g(std::abs(y)); }, DecayProfile{2.0 * k - s, s != 0.0},
          1e-11);
      EXPECT_LE(std::abs(plane.value - radial), plane.error_estimate + radial_err + 1e-11) << k << " " << s;
    }
  }
}

TEST(IntegratePlane, SerialAndParallelAgreeBitwise) {
  auto f = [](Complex y) { return std::exp(-std::norm(y - Complex(0.3, 0.1))) * (1.0 + y.real()); };
  setenv("LIOUVILLE_THREADS", "1", 1);
  const double serial = quadrature::integrate_plane(f, DecayProfile{40.0, false}, 1e-11).value;
  setenv("LIOUVILLE_THREADS", "4", 1);
  const double parallel = quadrature::integrate_plane(f, DecayProfile{40.0, false}, 1e-11).value;
  unsetenv("LIOUVILLE_THREADS");
  EXPECT_EQ(serial, parallel);
}

TEST(IntegrateRadial, BetaOracles) {
  EXPECT_NEAR(quadrature::integrate_radial([](double r) { return std::pow(1.0 + r * r, -3); }, 0.0), pi / 2.0,
              1e-12);
  // 2 pi int rho^3 (1+rho^2)^-4 = pi B(2,2) = pi/6.
  EXPECT_NEAR(quadrature::integrate_radial([](double r) { return std::pow(1.0 + r * r, -4); }, 2.0), pi / 6.0,
              1e-12);
  EXPECT_EQ(quadrature::integrate_radial([](double) { return 0.0; }, 1.5), 0.0);
}

TEST(IntegrateRadial, DivergentTailIsReported) {
  EXPECT_THROW(quadrature::integrate_radial([](double r) { return 1.0 / (1.0 + r * r); }, 0.0), QuadratureError);
}

TEST(CanonicalIdentities, StatedValues) {
  EXPECT_NEAR(quadrature::canonical_identities(1, 0.0).id3, pi / 12.0, 1e-9);
  EXPECT_NEAR(quadrature::canonical_identities(2, 0.0).id1, -pi / 4.0, 1e-9);
  EXPECT_NEAR(quadrature::canonical_identities(3, Complex(0.5, 0.25)).quantization, 24.0 * pi, 1e-8);
}

TEST(CanonicalIdentities, SuiteHoldsForSmallShifts) {
  for (int alpha = 1; alpha <= 4; ++alpha) {
    for (Complex xi : {Complex(0.0), Complex(1.0, 0.0), Complex(0.0, -0.7), Complex(0.6, 0.8)}) {
      const auto r = quadrature::canonical_identities(alpha, xi);
      EXPECT_NEAR(r.id1 / (-pi / (2.0 * alpha)), 1.0, 1e-8) << alpha << xi;
      EXPECT_LE(std::abs(r.id2), 1e-8) << alpha << xi;
      EXPECT_NEAR(r.id3 / (pi / (12.0 * alpha)), 1.0, 1e-8) << alpha << xi;
      EXPECT_NEAR(r.id3_imag / (pi / (12.0 * alpha)), 1.0, 1e-8) << alpha << xi;
      EXPECT_NEAR(r.quantization / (8.0 * pi * alpha), 1.0, 1e-8) << alpha << xi;
    }
  }
}

TEST(CanonicalIdentities, RejectsAlphaZero) { EXPECT_THROW(quadrature::canonical_identities(0, 0.0), ArgumentError); }

TEST(ChangeOfVariables, GaussianAndRational) {
  auto gauss = [](Complex y) { return std::exp(-std::norm(y)); };
  EXPECT_EQ(quadrature::change_of_variables_check(gauss, 1, 40.0), 0.0);
  EXPECT_LE(quadrature::change_of_variables_check(gauss, 3, 40.0), 1e-8);
  auto rational = [](Complex y) { return std::pow(1.0 + std::norm(y), -3); };
  EXPECT_LE(quadrature::change_of_variables_check(rational, 2, 6.0), 1e-8);
  // Common value (1/2)(pi/2).
  const double lhs = quadrature::integrate_plane(
                         [&](Complex y) { return std::norm(y) * rational(y * y); }, DecayProfile{10.0, true}, 1e-11)
                         .value;
  EXPECT_NEAR(lhs, pi / 4.0, 1e-9);
}

TEST(VanishingMoments, CenteredAndShiftedProfiles) {
  auto centered = [](Complex w) { return std::pow(1.0 + std::norm(w), -3); };
  auto [re, im] = quadrature::vanishing_moment_check(centered, 2, 1, 6.0);
  EXPECT_LE(std::abs(re), 1e-8);
  EXPECT_LE(std::abs(im), 1e-8);
  auto shifted = [](Complex w) { return std::pow(1.0 + std::norm(w - 0.3), -3); };
  std::tie(re, im) = quadrature::vanishing_moment_check(shifted, 3, 2, 6.0);
  EXPECT_LE(std::abs(re), 1e-8);
  EXPECT_LE(std::abs(im), 1e-8);
  std::tie(re, im) = quadrature::vanishing_moment_check([](Complex) { return 0.0; }, 4, 3, 6.0);
  EXPECT_EQ(re, 0.0);
  EXPECT_EQ(im, 0.0);
}

TEST(VanishingMoments, GammaOutOfRange) {
  auto f = [](Complex w) { return std::pow(1.0 + std::norm(w), -3); };
  EXPECT_THROW(quadrature::vanishing_moment_check(f, 3, 0, 6.0), ArgumentError);
  EXPECT_THROW(quadrature::vanishing_moment_check(f, 3, 3, 6.0), ArgumentError);
}

TEST(Parallel, PairwiseSumIsOrderFixed) {
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + i);
  const double a = pairwise_sum(v.data(), v.size());
  const double b = pairwise_sum(v.data(), v.size());
  EXPECT_EQ(a, b);
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_NEAR(a, naive, 1e-12);
}
