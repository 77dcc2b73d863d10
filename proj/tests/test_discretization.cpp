#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "liouville/discretization.hpp"

using namespace liouville;
using discretization::Discretization;
using discretization::Field;
using discretization::Resolution;

namespace {

Resolution uniform(double h) { return Resolution{h, h, 1.0, 0.1}; }

double bowl(Complex x) { return 1.0 - std::norm(x); }

// u = (1 - |x|^2)(1 + x1), -Delta u = 4 + 8 x1.
double manufactured(Complex x) { return bowl(x) * (1.0 + x.real()); }
double manufactured_rhs(Complex x) { return 4.0 + 8.0 * x.real(); }

Field random_field(const Discretization& disc, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(disc.node_count());
  for (auto& x : v) x = n(rng);
  return Field(disc, v);
}

}  // namespace

TEST(Mesh, NodeCountMatchesHexagonalDensity) {
  for (double h : {0.1, 0.05, 0.025}) {
    const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(h));
    // A triangular lattice of spacing h carries 2/sqrt(3) nodes per h^2.
    const double expected = 2.0 / std::sqrt(3.0) * pi / (h * h);
    EXPECT_GT(disc.node_count(), 0.8 * expected) << h;
    EXPECT_LT(disc.node_count(), 1.25 * expected) << h;
    EXPECT_GE(disc.min_angle_degrees(), 20.0);
  }
}

TEST(Mesh, GradedMeshConcentratesNodesNearOrigin) {
  const auto disc = discretization::build(geometry::DomainModel::unit_disk(), Resolution::for_bubble(0.05));
  std::size_t inner = 0;
  for (Complex x : disc.nodes()) inner += std::abs(x) < 0.05;
  // At spacing delta/16 the disk of radius delta holds about (2/sqrt 3) pi 256 nodes.
  EXPECT_GT(inner, 0.8 * 2.0 / std::sqrt(3.0) * pi * 256.0);
  EXPECT_LT(disc.node_count(), 200000u);
}

TEST(Mesh, RejectsInvalidResolution) {
  const auto d = geometry::DomainModel::unit_disk();
  EXPECT_THROW(discretization::build(d, Resolution{0.0, 0.1, 0.1, 0.1}), ArgumentError);
  EXPECT_THROW(discretization::build(d, Resolution{0.2, 0.1, 0.1, 0.1}), ArgumentError);
  EXPECT_THROW(discretization::build(d, uniform(0.5)), ArgumentError);
  EXPECT_THROW(Resolution::for_bubble(0.0), ArgumentError);
}

TEST(Mesh, CurveDomainBoundaryNodesLieOnCurve) {
  const auto d = geometry::DomainModel::curve(geometry::BoundaryCurve::fourier({1.0, 0.0, 0.0, 0.1}, {}), 3);
  const auto disc = discretization::build(d, uniform(0.05));
  for (std::size_t n = 0; n < disc.node_count(); ++n) {
    if (!disc.boundary_flags()[n]) continue;
    const Complex x = disc.nodes()[n];
    EXPECT_NEAR(std::abs(x), d.boundary_radius(std::arg(x)), 1e-12);
  }
}

TEST(Poisson, ManufacturedSolutionConvergesAtSecondOrder) {
  std::vector<double> h_values{0.1, 0.05, 0.025}, errors;
  for (double h : h_values) {
    const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(h));
    const auto [u, report] = discretization::poisson_solve(disc, manufactured_rhs);
    EXPECT_LE(report.residual_norm, 1e-10);
    const Eigen::VectorXd err = u.qp() - discretization::sample_qp(disc, manufactured);
    errors.push_back(discretization::lp_norm_qp(disc, err, 2.0));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log(errors[i - 1] / errors[i]) / std::log(h_values[i - 1] / h_values[i]);
    EXPECT_NEAR(order, 2.0, 0.3) << "h = " << h_values[i];
  }
}

TEST(Poisson, DirichletEnergyOfBowlApproachesTwoPi) {
  // int |grad(1 - |x|^2)|^2 = int 4 |x|^2 = 2 pi.
  const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(0.025));
  const auto [u, report] = discretization::poisson_solve(disc, [](Complex) { return 4.0; });
  EXPECT_NEAR(discretization::h1_norm(u) * discretization::h1_norm(u), 2.0 * pi, 1e-2);
  const Field stiffness_only(disc, u.nodal());
  EXPECT_NEAR(discretization::h1_inner(stiffness_only, stiffness_only), 2.0 * pi, 2e-2);
}

TEST(Forms, WeightedMassOfBowl) {
  // int (1 - |x|^2)^2 = pi/3.
  const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(0.025));
  const auto u = discretization::interpolate(disc, bowl);
  EXPECT_NEAR(discretization::weighted_mass([](Complex) { return 1.0; }, u, u), pi / 3.0, 1e-3);
  EXPECT_NEAR(discretization::integrate(disc, [](Complex x) { return bowl(x) * bowl(x); }), pi / 3.0, 1e-3);
}

TEST(Forms, CauchySchwarzAndBilinearity) {
  const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(0.08));
  std::mt19937 rng(3);
  for (int t = 0; t < 10; ++t) {
    const Field u = random_field(disc, rng), v = random_field(disc, rng), w = random_field(disc, rng);
    const double uv = discretization::h1_inner(u, v);
    EXPECT_LE(std::abs(uv), discretization::h1_norm(u) * discretization::h1_norm(v) * (1.0 + 1e-12));
    EXPECT_NEAR(uv, discretization::h1_inner(v, u), 1e-10 * std::abs(uv) + 1e-12);
    const Field combo(disc, 2.0 * u.nodal() - 3.0 * v.nodal());
    const double lhs = discretization::h1_inner(combo, w);
    const double rhs = 2.0 * discretization::h1_inner(u, w) - 3.0 * discretization::h1_inner(v, w);
    EXPECT_NEAR(lhs, rhs, 1e-10 * (std::abs(lhs) + 1.0));
  }
}

TEST(Poisson, DiscreteMaximumPrinciple) {
  const auto d = geometry::DomainModel::curve(geometry::BoundaryCurve::ellipse(1.0, 0.7));
  const auto disc = discretization::build(d, uniform(0.05));
  const auto [u, report] =
      discretization::poisson_solve(disc, [](Complex x) { return std::exp(-20.0 * std::norm(x - 0.3)); });
  EXPECT_GE(u.nodal().minCoeff(), -1e-14);
  EXPECT_GT(u.nodal().maxCoeff(), 0.0);
}

TEST(Poisson, GalerkinOrthogonality) {
  const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(0.06));
  const auto [u, report] = discretization::poisson_solve(disc, manufactured_rhs);
  const Field u_p1(disc, u.nodal());
  const Eigen::VectorXd f_qp = discretization::sample_qp(disc, manufactured_rhs);
  std::mt19937 rng(5);
  for (int t = 0; t < 5; ++t) {
    const Field v = random_field(disc, rng);
    const double a = discretization::h1_inner(u_p1, v);
    const double load = discretization::integrate(disc, Eigen::VectorXd(f_qp.cwiseProduct(v.qp())));
    EXPECT_NEAR(a, load, 1e-9 * (std::abs(load) + 1.0));
  }
}

TEST(Field, BoundaryIsZeroAndInterpolationIsSecondOrder) {
  const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(0.05));
  const auto u = discretization::interpolate(disc, manufactured);
  for (std::size_t n = 0; n < disc.node_count(); ++n)
    if (disc.boundary_flags()[n]) EXPECT_EQ(u.nodal()[n], 0.0);
  for (Complex x : {Complex(0.1, 0.2), Complex(-0.4, 0.3), Complex(0.0, -0.7)})
    EXPECT_NEAR(u.at(x), manufactured(x), 0.05 * 0.05);
  EXPECT_THROW(Field(disc, Eigen::VectorXd::Zero(3)), ArgumentError);
}

TEST(Export, CsvFilesCarryHeaders) {
  const auto disc = discretization::build(geometry::DomainModel::unit_disk(), uniform(0.2));
  const auto dir = std::filesystem::temp_directory_path() / "liouville_disc_test";
  std::filesystem::create_directories(dir);
  discretization::write_mesh_csv(disc, (dir / "nodes.csv").string(), (dir / "cells.csv").string(), {"test"});
  discretization::write_field_csv(discretization::interpolate(disc, bowl), (dir / "u.csv").string(), {"test"});
  std::ifstream in(dir / "nodes.csv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# test");
  std::size_t lines = 0;
  std::ifstream field(dir / "u.csv");
  for (std::string line; std::getline(field, line);)
    if (!line.empty() && line[0] != '#') ++lines;
  // One column-name row plus one row per node.
  EXPECT_EQ(lines, disc.node_count() + 1);
  std::filesystem::remove_all(dir);
}
