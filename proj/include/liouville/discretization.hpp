#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "liouville/common.hpp"
#include "liouville/geometry.hpp"

namespace liouville::discretization {

// Radial grading of the ring mesh. Spacing is h_min inside fine_radius and
// grows linearly with slope `grading` up to h_max.
struct Resolution {
  double h_min = 0.01;
  double h_max = 0.04;
  double fine_radius = 0.1;
  double grading = 0.12;

  // h_min = delta/16 with a uniform zone of radius 3 delta around the origin.
  static Resolution for_bubble(double delta, double nodes_per_delta = 16.0);
};

struct Mesh;

// P1 conforming discretization of H^1_0 on a graded ring triangulation.
// Immutable after build and cheap to copy.
class Discretization {
public:
  explicit Discretization(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {}

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> shared() const { return mesh_; }
  const geometry::DomainModel& domain() const;
  const Resolution& resolution() const;

  std::size_t node_count() const;
  std::size_t interior_count() const;
  std::size_t triangle_count() const;
  std::size_t qp_count() const;
  const std::vector<Complex>& nodes() const;
  const std::vector<std::array<int, 3>>& triangles() const;
  const std::vector<bool>& boundary_flags() const;
  const std::vector<Complex>& qp_points() const;
  const std::vector<double>& qp_weights() const;

  // Smallest interior angle over all triangles, in degrees.
  double min_angle_degrees() const;

  bool operator==(const Discretization& other) const { return mesh_ == other.mesh_; }

private:
  std::shared_ptr<const Mesh> mesh_;
};

// Throws ArgumentError if the resolution is invalid or the mesh fails its
// quality checks.
Discretization build(const geometry::DomainModel& domain, const Resolution& resolution);

// A member of the discrete H^1_0: nodal values (zero on the boundary) plus
// values at the quadrature points. Fields built from closed forms carry exact
// quadrature values; solved fields use P1 interpolation there. A field may
// carry its source s = -Delta u at the quadrature points, which makes
// H^1 products with it exact for any P1 partner.
class Field {
public:
  Field(Discretization disc, Eigen::VectorXd nodal, std::optional<Eigen::VectorXd> qp = std::nullopt,
        std::optional<Eigen::VectorXd> source = std::nullopt);

  const Discretization& disc() const { return disc_; }
  const Eigen::VectorXd& nodal() const { return nodal_; }
  const Eigen::VectorXd& qp() const { return qp_; }
  const std::optional<Eigen::VectorXd>& source() const { return source_; }

  static Field zero(const Discretization& disc);
  // Value at an arbitrary interior point by P1 interpolation.
  double at(Complex x) const;
  double max_abs() const { return nodal_.cwiseAbs().maxCoeff(); }

private:
  Discretization disc_;
  Eigen::VectorXd nodal_;
  Eigen::VectorXd qp_;
  std::optional<Eigen::VectorXd> source_;
};

// Field from a function that must vanish on the boundary; boundary nodes are
// set to zero exactly.
Field interpolate(const Discretization& disc, const std::function<double(Complex)>& f);
// Nodal and quadrature values from precomputed vectors.
Eigen::VectorXd sample_qp(const Discretization& disc, const std::function<double(Complex)>& f);
Eigen::VectorXd sample_nodes(const Discretization& disc, const std::function<double(Complex)>& f);
// P1 interpolation of nodal values to the quadrature points.
Eigen::VectorXd nodal_to_qp(const Discretization& disc, const Eigen::VectorXd& nodal);

struct LinearSolveReport {
  std::string method;
  std::size_t unknowns = 0;
  std::size_t nonzeros = 0;
  double residual_norm = 0.0;  // relative residual of the solved system
};

// Discrete weak solution of -Delta u = rhs, u = 0 on the boundary.
std::pair<Field, LinearSolveReport> poisson_solve(const Discretization& disc,
                                                  const std::function<double(Complex)>& rhs);
std::pair<Field, LinearSolveReport> poisson_solve_qp(const Discretization& disc, const Eigen::VectorXd& rhs_qp);

// Load vector int f psi_i over interior basis functions, f given at quadrature points.
Eigen::VectorXd load_vector(const Discretization& disc, const Eigen::VectorXd& f_qp);
// Interior stiffness matrix and its factorization are owned by the mesh.
const Eigen::SparseMatrix<double>& interior_stiffness(const Discretization& disc);
// Maps nodal vectors to interior-unknown vectors and back (boundary set to zero).
Eigen::VectorXd restrict_interior(const Discretization& disc, const Eigen::VectorXd& nodal);
Eigen::VectorXd extend_interior(const Discretization& disc, const Eigen::VectorXd& interior);
// Interior mass matrix int weight psi_i psi_j with the weight at quadrature points.
Eigen::SparseMatrix<double> weighted_mass_matrix(const Discretization& disc, const Eigen::VectorXd& weight_qp);

double integrate(const Discretization& disc, const Eigen::VectorXd& values_qp);
double integrate(const Discretization& disc, const std::function<double(Complex)>& f);

// int grad u . grad v. Exact through -Delta v = source when either field carries
// its source; otherwise the P1 stiffness form.
double h1_inner(const Field& u, const Field& v);
double h1_norm(const Field& u);
double lp_norm(const Field& u, double p);
double lp_norm_qp(const Discretization& disc, const Eigen::VectorXd& values_qp, double p);
// int weight u v, weight given pointwise.
double weighted_mass(const std::function<double(Complex)>& weight, const Field& u, const Field& v);
double weighted_mass_qp(const Eigen::VectorXd& weight_qp, const Field& u, const Field& v);

// CSV export: nodes (index,x1,x2,boundary), cells (index,n0,n1,n2) and
// node values (index,x1,x2,value). Each file starts with `# ` header lines.
void write_mesh_csv(const Discretization& disc, const std::string& nodes_path, const std::string& cells_path,
                    const std::vector<std::string>& header_lines = {});
void write_field_csv(const Field& field, const std::string& path, const std::vector<std::string>& header_lines = {});

}  // namespace liouville::discretization
