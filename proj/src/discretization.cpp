#include "liouville/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include <Eigen/SparseCholesky>

#include "liouville/parallel.hpp"

namespace liouville::discretization {

namespace {

// Seven-point degree-5 rule on the reference triangle (barycentric, weights sum to 1).
constexpr int rule_points = 7;
constexpr double rule_a = 0.470142064105115, rule_b = 0.101286507323456;
constexpr std::array<std::array<double, 3>, rule_points> rule_bary{{
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
    {1.0 - 2.0 * rule_a, rule_a, rule_a},
    {rule_a, 1.0 - 2.0 * rule_a, rule_a},
    {rule_a, rule_a, 1.0 - 2.0 * rule_a},
    {1.0 - 2.0 * rule_b, rule_b, rule_b},
    {rule_b, 1.0 - 2.0 * rule_b, rule_b},
    {rule_b, rule_b, 1.0 - 2.0 * rule_b},
}};
constexpr std::array<double, rule_points> rule_weight{0.225,
                                                      0.132394152788506, 0.132394152788506, 0.132394152788506,
                                                      0.125939180544827, 0.125939180544827, 0.125939180544827};

double signed_area(Complex a, Complex b, Complex c) {
  return 0.5 * ((b - a).real() * (c - a).imag() - (b - a).imag() * (c - a).real());
}

}  // namespace

struct Mesh {
  geometry::DomainModel domain;
  Resolution resolution;
  std::vector<Complex> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;
  std::vector<int> interior_index;  // -1 on the boundary
  std::vector<int> interior_nodes;
  std::vector<double> ring_s;       // radial fraction of each ring, ring 0 is the center
  std::vector<std::vector<int>> band_triangles;  // triangles between ring i and i+1
  std::vector<Complex> qp;
  std::vector<double> qw;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;

  explicit Mesh(geometry::DomainModel d) : domain(std::move(d)) {}

  // Triangle containing x and its barycentric coordinates, or -1.
  int locate(Complex x, std::array<double, 3>& bary) const {
    const double s = domain.radial_fraction(x);
    if (s > 1.0 + 1e-12) return -1;
    auto test = [&](int t) {
      const auto& tri = triangles[t];
      const Complex a = nodes[tri[0]], b = nodes[tri[1]], c = nodes[tri[2]];
      const double area = signed_area(a, b, c);
      const double l0 = signed_area(x, b, c) / area, l1 = signed_area(a, x, c) / area;
      const double l2 = 1.0 - l0 - l1;
      if (l0 >= -1e-10 && l1 >= -1e-10 && l2 >= -1e-10) {
        bary = {l0, l1, l2};
        return true;
      }
      return false;
    };
    const auto it = std::upper_bound(ring_s.begin(), ring_s.end(), s);
    const int band = std::clamp(static_cast<int>(it - ring_s.begin()) - 1, 0, static_cast<int>(band_triangles.size()) - 1);
    for (int d : {0, -1, 1}) {
      const int bnd = band + d;
      if (bnd < 0 || bnd >= static_cast<int>(band_triangles.size())) continue;
      for (int t : band_triangles[bnd])
        if (test(t)) return t;
    }
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
      if (test(t)) return t;
    return -1;
  }
};

Resolution Resolution::for_bubble(double delta, double nodes_per_delta) {
  if (!(delta > 0.0)) throw ArgumentError("resolution: delta must be positive");
  Resolution r;
  r.h_min = delta / nodes_per_delta;
  r.fine_radius = 3.0 * delta;
  r.h_max = std::max(0.04, r.h_min);
  return r;
}

const geometry::DomainModel& Discretization::domain() const { return mesh_->domain; }
const Resolution& Discretization::resolution() const { return mesh_->resolution; }
std::size_t Discretization::node_count() const { return mesh_->nodes.size(); }
std::size_t Discretization::interior_count() const { return mesh_->interior_nodes.size(); }
std::size_t Discretization::triangle_count() const { return mesh_->triangles.size(); }
std::size_t Discretization::qp_count() const { return mesh_->qp.size(); }
const std::vector<Complex>& Discretization::nodes() const { return mesh_->nodes; }
const std::vector<std::array<int, 3>>& Discretization::triangles() const { return mesh_->triangles; }
const std::vector<bool>& Discretization::boundary_flags() const { return mesh_->boundary; }
const std::vector<Complex>& Discretization::qp_points() const { return mesh_->qp; }
const std::vector<double>& Discretization::qp_weights() const { return mesh_->qw; }

double Discretization::min_angle_degrees() const {
  double worst = 180.0;
  for (const auto& t : mesh_->triangles) {
    for (int k = 0; k < 3; ++k) {
      const Complex p = mesh_->nodes[t[k]];
      const Complex u = mesh_->nodes[t[(k + 1) % 3]] - p, v = mesh_->nodes[t[(k + 2) % 3]] - p;
      worst = std::min(worst, std::abs(std::arg(v / u)) * 180.0 / pi);
    }
  }
  return worst;
}

// Ring mesh: center node, then rings at radial fractions s_i carrying n_i
// nodes with n_i a multiple of 12, so the triangulation is invariant under
// rotation by 2 pi/12 in the parameter plane. Consecutive rings are joined by
// a zipper whose decisions use exact integer angle comparisons.
Discretization build(const geometry::DomainModel& domain, const Resolution& res) {
  if (!(res.h_min > 0.0 && res.h_max >= res.h_min && res.fine_radius >= 0.0 && res.grading > 0.0))
    throw ArgumentError("build: invalid resolution");
  const double r_ref = domain.min_boundary_radius();
  if (res.h_min > 0.25 * r_ref) throw ArgumentError("build: h_min too large for the domain");
  auto spacing = [&](double rho) {
    return std::clamp(res.h_min + res.grading * std::max(0.0, rho - res.fine_radius), res.h_min, res.h_max);
  };

  std::vector<double> rho{0.0};
  while (true) {
    const double next = rho.back() + spacing(rho.back());
    if (next >= r_ref - 0.5 * spacing(rho.back())) break;
    rho.push_back(next);
  }
  rho.push_back(r_ref);

  auto mesh = std::make_shared<Mesh>(domain);
  mesh->resolution = res;
  const int rings = static_cast<int>(rho.size());
  std::vector<int> count(rings), start(rings), offset(rings);
  count[0] = 1;
  for (int i = 1; i < rings; ++i) {
    const double target = 2.0 * pi * rho[i] / spacing(rho[i]);
    int n = 12 * std::max(1, static_cast<int>(std::lround(target / 12.0)));
    if (i > 1) {
      const int lo = std::max(12, 12 * ((count[i - 1] * 2 / 3 + 11) / 12));
      const int hi = std::max(count[i - 1] + 12, 12 * (count[i - 1] * 3 / 2 / 12));
      n = std::clamp(n, lo, hi);
    }
    count[i] = n;
    offset[i] = (i > 1 && count[i] == count[i - 1]) ? 1 - offset[i - 1] : 0;
  }

  for (int i = 0; i < rings; ++i) {
    start[i] = static_cast<int>(mesh->nodes.size());
    const double s = rho[i] / r_ref;
    mesh->ring_s.push_back(s);
    for (int k = 0; k < count[i]; ++k) {
      if (i == 0) {
        mesh->nodes.push_back(0.0);
        break;
      }
      const double theta = pi * (2.0 * k + offset[i]) / count[i];
      mesh->nodes.emplace_back(std::polar(s * domain.boundary_radius(theta), theta));
    }
    for (int k = 0; k < count[i]; ++k) mesh->boundary.push_back(i == rings - 1);
  }

  mesh->band_triangles.resize(rings - 1);
  auto add = [&](int band, int a, int b, int c) {
    if (signed_area(mesh->nodes[a], mesh->nodes[b], mesh->nodes[c]) < 0.0) std::swap(b, c);
    mesh->band_triangles[band].push_back(static_cast<int>(mesh->triangles.size()));
    mesh->triangles.push_back({a, b, c});
  };
  for (int i = 0; i + 1 < rings; ++i) {
    const int na = count[i], nb = count[i + 1];
    auto outer = [&](int k) { return start[i + 1] + (k % nb); };
    if (i == 0) {
      for (int k = 0; k < nb; ++k) add(0, start[0], outer(k), outer(k + 1));
      continue;
    }
    auto inner = [&](int k) { return start[i] + (k % na); };
    int ka = 0, kb = 0;
    while (ka < na || kb < nb) {
      // Next angles (2k + o)/(2n) compared exactly by cross multiplication.
      const long long next_a = static_cast<long long>(2 * (ka + 1) + offset[i]) * nb;
      const long long next_b = static_cast<long long>(2 * (kb + 1) + offset[i + 1]) * na;
      if (kb == nb || (ka < na && next_a <= next_b)) {
        add(i, inner(ka), outer(kb), inner(ka + 1));
        ++ka;
      } else {
        add(i, inner(ka), outer(kb), outer(kb + 1));
        ++kb;
      }
    }
  }

  for (const auto& t : mesh->triangles)
    if (!(signed_area(mesh->nodes[t[0]], mesh->nodes[t[1]], mesh->nodes[t[2]]) > 0.0))
      throw ArgumentError("build: degenerate triangle (boundary curve too irregular for the ring mesh)");

  mesh->interior_index.assign(mesh->nodes.size(), -1);
  for (std::size_t n = 0; n < mesh->nodes.size(); ++n) {
    if (!mesh->boundary[n]) {
      mesh->interior_index[n] = static_cast<int>(mesh->interior_nodes.size());
      mesh->interior_nodes.push_back(static_cast<int>(n));
    }
  }

  const std::size_t nt = mesh->triangles.size();
  mesh->qp.resize(nt * rule_points);
  mesh->qw.resize(nt * rule_points);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nt * 9);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh->triangles[t];
    const Complex p[3] = {mesh->nodes[tri[0]], mesh->nodes[tri[1]], mesh->nodes[tri[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    for (int q = 0; q < rule_points; ++q) {
      mesh->qp[t * rule_points + q] = rule_bary[q][0] * p[0] + rule_bary[q][1] * p[1] + rule_bary[q][2] * p[2];
      mesh->qw[t * rule_points + q] = rule_weight[q] * area;
    }
    // grad psi_k = i (p_{k+2} - p_{k+1}) / (2 area) as a complex number.
    Complex grad[3];
    for (int k = 0; k < 3; ++k) grad[k] = Complex(0.0, -1.0) * (p[(k + 2) % 3] - p[(k + 1) % 3]) / (2.0 * area);
    for (int a = 0; a < 3; ++a) {
      const int ia = mesh->interior_index[tri[a]];
      if (ia < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int ib = mesh->interior_index[tri[b]];
        if (ib < 0) continue;
        triplets.emplace_back(ia, ib, area * (grad[a].real() * grad[b].real() + grad[a].imag() * grad[b].imag()));
      }
    }
  }
  const auto ni = static_cast<Eigen::Index>(mesh->interior_nodes.size());
  mesh->stiffness.resize(ni, ni);
  mesh->stiffness.setFromTriplets(triplets.begin(), triplets.end());
  mesh->factor.compute(mesh->stiffness);
  if (mesh->factor.info() != Eigen::Success) throw Error("build: stiffness factorization failed");
  return Discretization(mesh);
}

// ---------------------------------------------------------------------------
// Fields

Field::Field(Discretization disc, Eigen::VectorXd nodal, std::optional<Eigen::VectorXd> qp,
             std::optional<Eigen::VectorXd> source)
    : disc_(std::move(disc)), nodal_(std::move(nodal)), source_(std::move(source)) {
  if (static_cast<std::size_t>(nodal_.size()) != disc_.node_count())
    throw ArgumentError("field: nodal vector does not match the discretization");
  for (std::size_t n = 0; n < disc_.node_count(); ++n)
    if (disc_.boundary_flags()[n]) nodal_[n] = 0.0;
  qp_ = qp ? std::move(*qp) : nodal_to_qp(disc_, nodal_);
  if (static_cast<std::size_t>(qp_.size()) != disc_.qp_count())
    throw ArgumentError("field: quadrature vector does not match the discretization");
  if (source_ && static_cast<std::size_t>(source_->size()) != disc_.qp_count())
    throw ArgumentError("field: source vector does not match the discretization");
}

Field Field::zero(const Discretization& disc) {
  return Field(disc, Eigen::VectorXd::Zero(disc.node_count()), Eigen::VectorXd::Zero(disc.qp_count()));
}

double Field::at(Complex x) const {
  std::array<double, 3> bary{};
  const int t = disc_.mesh().locate(x, bary);
  if (t < 0) throw DomainError("field: point outside the mesh");
  const auto& tri = disc_.triangles()[t];
  return bary[0] * nodal_[tri[0]] + bary[1] * nodal_[tri[1]] + bary[2] * nodal_[tri[2]];
}

Eigen::VectorXd sample_qp(const Discretization& disc, const std::function<double(Complex)>& f) {
  const auto& pts = disc.qp_points();
  Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
  parallel_for(pts.size(), [&](std::size_t i) { out[static_cast<Eigen::Index>(i)] = f(pts[i]); });
  return out;
}

Eigen::VectorXd sample_nodes(const Discretization& disc, const std::function<double(Complex)>& f) {
  const auto& pts = disc.nodes();
  Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
  parallel_for(pts.size(), [&](std::size_t i) { out[static_cast<Eigen::Index>(i)] = f(pts[i]); });
  return out;
}

Eigen::VectorXd nodal_to_qp(const Discretization& disc, const Eigen::VectorXd& nodal) {
  const auto& tris = disc.triangles();
  Eigen::VectorXd out(static_cast<Eigen::Index>(disc.qp_count()));
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int q = 0; q < rule_points; ++q)
      out[static_cast<Eigen::Index>(t * rule_points + q)] = rule_bary[q][0] * nodal[tris[t][0]] +
                                                            rule_bary[q][1] * nodal[tris[t][1]] +
                                                            rule_bary[q][2] * nodal[tris[t][2]];
  return out;
}

Field interpolate(const Discretization& disc, const std::function<double(Complex)>& f) {
  return Field(disc, sample_nodes(disc, f), sample_qp(disc, f));
}

Eigen::VectorXd load_vector(const Discretization& disc, const Eigen::VectorXd& f_qp) {
  const auto& m = disc.mesh();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.interior_nodes.size()));
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    for (int q = 0; q < rule_points; ++q) {
      const std::size_t i = t * rule_points + q;
      const double fw = f_qp[static_cast<Eigen::Index>(i)] * m.qw[i];
      for (int k = 0; k < 3; ++k) {
        const int row = m.interior_index[m.triangles[t][k]];
        if (row >= 0) b[row] += fw * rule_bary[q][k];
      }
    }
  }
  return b;
}

const Eigen::SparseMatrix<double>& interior_stiffness(const Discretization& disc) { return disc.mesh().stiffness; }

Eigen::VectorXd restrict_interior(const Discretization& disc, const Eigen::VectorXd& nodal) {
  const auto& m = disc.mesh();
  Eigen::VectorXd out(static_cast<Eigen::Index>(m.interior_nodes.size()));
  for (std::size_t i = 0; i < m.interior_nodes.size(); ++i) out[static_cast<Eigen::Index>(i)] = nodal[m.interior_nodes[i]];
  return out;
}

Eigen::VectorXd extend_interior(const Discretization& disc, const Eigen::VectorXd& interior) {
  const auto& m = disc.mesh();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.nodes.size()));
  for (std::size_t i = 0; i < m.interior_nodes.size(); ++i) out[m.interior_nodes[i]] = interior[static_cast<Eigen::Index>(i)];
  return out;
}

Eigen::SparseMatrix<double> weighted_mass_matrix(const Discretization& disc, const Eigen::VectorXd& weight_qp) {
  const auto& m = disc.mesh();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(m.triangles.size() * 9);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    double local[3][3] = {};
    for (int q = 0; q < rule_points; ++q) {
      const std::size_t i = t * rule_points + q;
      const double ww = weight_qp[static_cast<Eigen::Index>(i)] * m.qw[i];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) local[a][b] += ww * rule_bary[q][a] * rule_bary[q][b];
    }
    for (int a = 0; a < 3; ++a) {
      const int ia = m.interior_index[m.triangles[t][a]];
      if (ia < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int ib = m.interior_index[m.triangles[t][b]];
        if (ib >= 0) triplets.emplace_back(ia, ib, local[a][b]);
      }
    }
  }
  const auto ni = static_cast<Eigen::Index>(m.interior_nodes.size());
  Eigen::SparseMatrix<double> out(ni, ni);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

std::pair<Field, LinearSolveReport> poisson_solve_qp(const Discretization& disc, const Eigen::VectorXd& rhs_qp) {
  const auto& m = disc.mesh();
  const Eigen::VectorXd b = load_vector(disc, rhs_qp);
  const Eigen::VectorXd x = m.factor.solve(b);
  if (m.factor.info() != Eigen::Success) throw Error("poisson_solve: factorized solve failed");
  LinearSolveReport report;
  report.method = "sparse LDLT (AMD ordering)";
  report.unknowns = m.interior_nodes.size();
  report.nonzeros = static_cast<std::size_t>(m.stiffness.nonZeros());
  const double bn = b.norm();
  report.residual_norm = bn > 0.0 ? (m.stiffness * x - b).norm() / bn : (m.stiffness * x).norm();
  return {Field(disc, extend_interior(disc, x)), report};
}

std::pair<Field, LinearSolveReport> poisson_solve(const Discretization& disc,
                                                  const std::function<double(Complex)>& rhs) {
  return poisson_solve_qp(disc, sample_qp(disc, rhs));
}

// ---------------------------------------------------------------------------
// Forms

namespace {

void same_disc(const Field& u, const Field& v) {
  if (!(u.disc() == v.disc())) throw ArgumentError("fields live on different discretizations");
}

double weighted_sum(const Discretization& disc, const Eigen::VectorXd& values) {
  const auto& w = disc.qp_weights();
  std::vector<double> terms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) terms[i] = w[i] * values[static_cast<Eigen::Index>(i)];
  return pairwise_sum(terms.data(), terms.size());
}

}  // namespace

double integrate(const Discretization& disc, const Eigen::VectorXd& values_qp) {
  if (static_cast<std::size_t>(values_qp.size()) != disc.qp_count())
    throw ArgumentError("integrate: vector does not match the discretization");
  return weighted_sum(disc, values_qp);
}

double integrate(const Discretization& disc, const std::function<double(Complex)>& f) {
  return weighted_sum(disc, sample_qp(disc, f));
}

double h1_inner(const Field& u, const Field& v) {
  same_disc(u, v);
  const auto& disc = u.disc();
  if (v.source()) return weighted_sum(disc, v.source()->cwiseProduct(u.qp()));
  if (u.source()) return weighted_sum(disc, u.source()->cwiseProduct(v.qp()));
  const Eigen::VectorXd ui = restrict_interior(disc, u.nodal()), vi = restrict_interior(disc, v.nodal());
  return ui.dot(disc.mesh().stiffness * vi);
}

double h1_norm(const Field& u) { return std::sqrt(std::max(0.0, h1_inner(u, u))); }

double lp_norm_qp(const Discretization& disc, const Eigen::VectorXd& values_qp, double p) {
  if (!(p >= 1.0)) throw ArgumentError("lp_norm: p must be >= 1");
  const Eigen::VectorXd powered = values_qp.cwiseAbs().array().pow(p).matrix();
  return std::pow(integrate(disc, powered), 1.0 / p);
}

double lp_norm(const Field& u, double p) { return lp_norm_qp(u.disc(), u.qp(), p); }

double weighted_mass_qp(const Eigen::VectorXd& weight_qp, const Field& u, const Field& v) {
  same_disc(u, v);
  return integrate(u.disc(), weight_qp.cwiseProduct(u.qp()).cwiseProduct(v.qp()));
}

double weighted_mass(const std::function<double(Complex)>& weight, const Field& u, const Field& v) {
  return weighted_mass_qp(sample_qp(u.disc(), weight), u, v);
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::ofstream open_csv(const std::string& path, const std::vector<std::string>& header_lines) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (const auto& line : header_lines) out << "# " << line << '\n';
  return out;
}

}  // namespace

void write_mesh_csv(const Discretization& disc, const std::string& nodes_path, const std::string& cells_path,
                    const std::vector<std::string>& header_lines) {
  auto nodes = open_csv(nodes_path, header_lines);
  nodes << "index,x1,x2,boundary\n";
  for (std::size_t i = 0; i < disc.node_count(); ++i)
    nodes << i << ',' << disc.nodes()[i].real() << ',' << disc.nodes()[i].imag() << ','
          << (disc.boundary_flags()[i] ? 1 : 0) << '\n';
  auto cells = open_csv(cells_path, header_lines);
  cells << "index,n0,n1,n2\n";
  for (std::size_t i = 0; i < disc.triangle_count(); ++i) {
    const auto& t = disc.triangles()[i];
    cells << i << ',' << t[0] << ',' << t[1] << ',' << t[2] << '\n';
  }
}

void write_field_csv(const Field& field, const std::string& path, const std::vector<std::string>& header_lines) {
  auto out = open_csv(path, header_lines);
  out << "index,x1,x2,value\n";
  const auto& nodes = field.disc().nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out << i << ',' << nodes[i].real() << ',' << nodes[i].imag() << ',' << field.nodal()[static_cast<Eigen::Index>(i)]
        << '\n';
}

}  // namespace liouville::discretization
