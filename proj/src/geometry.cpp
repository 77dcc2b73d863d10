#include "liouville/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <utility>

#include <Eigen/Dense>

#include "liouville/expression.hpp"

namespace liouville::geometry {

// ---------------------------------------------------------------------------
// Boundary curve

BoundaryCurve BoundaryCurve::fourier(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs) {
  if (cos_coeffs.empty()) throw ArgumentError("fourier curve: need at least the mean radius");
  BoundaryCurve c;
  c.cos_ = std::move(cos_coeffs);
  c.sin_ = std::move(sin_coeffs);
  c.sin_.resize(std::max(c.sin_.size(), c.cos_.size()), 0.0);
  c.cos_.resize(c.sin_.size(), 0.0);
  return c;
}

BoundaryCurve BoundaryCurve::ellipse(double semi_axis_x, double semi_axis_y) {
  if (!(semi_axis_x > 0.0 && semi_axis_y > 0.0)) throw ArgumentError("ellipse: axes must be positive");
  BoundaryCurve c;
  c.ellipse_ = true;
  c.ax_ = semi_axis_x;
  c.ay_ = semi_axis_y;
  return c;
}

double BoundaryCurve::radius(double t) const {
  if (ellipse_) {
    const double q = std::pow(ay_ * std::cos(t), 2) + std::pow(ax_ * std::sin(t), 2);
    return ax_ * ay_ / std::sqrt(q);
  }
  double r = cos_[0];
  for (std::size_t k = 1; k < cos_.size(); ++k) r += cos_[k] * std::cos(k * t) + sin_[k] * std::sin(k * t);
  return r;
}

double BoundaryCurve::radius_d1(double t) const {
  if (ellipse_) {
    const double q = std::pow(ay_ * std::cos(t), 2) + std::pow(ax_ * std::sin(t), 2);
    const double dq = (ax_ * ax_ - ay_ * ay_) * std::sin(2.0 * t);
    return -0.5 * ax_ * ay_ * std::pow(q, -1.5) * dq;
  }
  double d = 0.0;
  for (std::size_t k = 1; k < cos_.size(); ++k)
    d += k * (-cos_[k] * std::sin(k * t) + sin_[k] * std::cos(k * t));
  return d;
}

double BoundaryCurve::radius_d2(double t) const {
  if (ellipse_) {
    const double q = std::pow(ay_ * std::cos(t), 2) + std::pow(ax_ * std::sin(t), 2);
    const double dq = (ax_ * ax_ - ay_ * ay_) * std::sin(2.0 * t);
    const double ddq = 2.0 * (ax_ * ax_ - ay_ * ay_) * std::cos(2.0 * t);
    return ax_ * ay_ * (0.75 * std::pow(q, -2.5) * dq * dq - 0.5 * std::pow(q, -1.5) * ddq);
  }
  double d = 0.0;
  for (std::size_t k = 1; k < cos_.size(); ++k)
    d -= double(k * k) * (cos_[k] * std::cos(k * t) + sin_[k] * std::sin(k * t));
  return d;
}

Complex BoundaryCurve::tangent(double t) const {
  return Complex(radius_d1(t), radius(t)) * std::polar(1.0, t);
}

double BoundaryCurve::curvature(double t) const {
  const double r = radius(t), r1 = radius_d1(t), r2 = radius_d2(t);
  const Complex d1 = Complex(r1, r) * std::polar(1.0, t);
  const Complex d2 = Complex(r2 - r, 2.0 * r1) * std::polar(1.0, t);
  return (std::conj(d1) * d2).imag() / std::pow(std::abs(d1), 3);
}

// ---------------------------------------------------------------------------
// Nystrom double-layer solver for star-shaped curves.
//
// u(x) = int K(x,y) mu(y) ds_y with K = (1/2 pi) n_y.(y - x)/|y - x|^2 and
// mu/2 + K mu = g on the boundary. The LU factors are reused for every datum.

namespace {

struct Nodes {
  std::vector<Complex> y;
  std::vector<Complex> normal;  // outward unit normal
  std::vector<double> w;        // |x'(t)| * 2 pi / M
  std::vector<double> t;
  std::vector<Complex> dtau;    // x'(t) * 2 pi / M
};

Nodes make_nodes(const BoundaryCurve& c, int m) {
  Nodes n;
  n.y.resize(m);
  n.normal.resize(m);
  n.w.resize(m);
  n.t.resize(m);
  n.dtau.resize(m);
  for (int j = 0; j < m; ++j) {
    const double t = 2.0 * pi * j / m;
    const Complex d = c.tangent(t);
    n.t[j] = t;
    n.y[j] = c.point(t);
    n.normal[j] = Complex(0.0, -1.0) * d / std::abs(d);
    n.w[j] = std::abs(d) * 2.0 * pi / m;
    n.dtau[j] = d * 2.0 * pi / double(m);
  }
  return n;
}

inline double dl_kernel(Complex x, Complex y, Complex normal) {
  const Complex d = y - x;
  return (normal.real() * d.real() + normal.imag() * d.imag()) / (2.0 * pi * std::norm(d));
}

// Trigonometric interpolation of equispaced samples onto a finer equispaced grid.
std::vector<double> upsample(const std::vector<double>& v, int factor) {
  const int m = static_cast<int>(v.size());
  const int half = m / 2;
  std::vector<Complex> coef(m);
  for (int k = 0; k < m; ++k) {
    Complex s{};
    for (int j = 0; j < m; ++j) s += v[j] * std::polar(1.0, -2.0 * pi * double(k) * j / m);
    coef[k] = s / double(m);
  }
  const int mf = m * factor;
  std::vector<double> out(mf);
  for (int i = 0; i < mf; ++i) {
    const double t = 2.0 * pi * i / mf;
    double s = coef[0].real();
    for (int k = 1; k < half; ++k) s += 2.0 * (coef[k] * std::polar(1.0, k * t)).real();
    s += (coef[half] * std::polar(1.0, half * t)).real() * (m % 2 == 0 ? 1.0 : 2.0);
    out[i] = s;
  }
  return out;
}

// d/dt of equispaced periodic samples (Nyquist mode dropped).
std::vector<double> spectral_derivative(const std::vector<double>& v) {
  const int m = static_cast<int>(v.size());
  std::vector<double> out(m, 0.0);
  for (int k = 1; k < (m + 1) / 2; ++k) {
    Complex c{};
    for (int j = 0; j < m; ++j) c += v[j] * std::polar(1.0, -2.0 * pi * double(k) * j / m);
    c /= double(m);
    for (int j = 0; j < m; ++j) out[j] += 2.0 * (Complex(0.0, k) * c * std::polar(1.0, 2.0 * pi * double(k) * j / m)).real();
  }
  return out;
}

}  // namespace

struct NystromSolver {
  static constexpr int upsample_factor = 8;
  BoundaryCurve curve;
  int m = 0;
  Nodes coarse, fine;
  double spacing = 0.0;  // mean coarse node spacing
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  NystromSolver(BoundaryCurve c, int nodes) : curve(std::move(c)), m(nodes) {
    coarse = make_nodes(curve, m);
    fine = make_nodes(curve, m * upsample_factor);
    spacing = std::accumulate(coarse.w.begin(), coarse.w.end(), 0.0) / m;
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        a(i, j) = (i == j) ? 0.5 + curve.curvature(coarse.t[i]) / (4.0 * pi) * coarse.w[i]
                           : dl_kernel(coarse.y[i], coarse.y[j], coarse.normal[j]) * coarse.w[j];
      }
    }
    lu.compute(a);
  }

  struct Density {
    std::vector<double> coarse;
    std::vector<Complex> holo_fine;  // boundary values of the holomorphic f with Re f = u
  };

  Density solve(const std::function<double(Complex)>& g) const {
    Eigen::VectorXd rhs(m);
    for (int j = 0; j < m; ++j) rhs[j] = g(coarse.y[j]);
    Eigen::VectorXd mu = lu.solve(rhs);
    Density d;
    d.coarse.assign(mu.data(), mu.data() + m);
    // f(x) = (1/2 pi i) int mu(tau) dtau / (tau - x); interior boundary limit
    // f = mu(t) + (1/2 pi i) int (mu(tau) - mu(t)) dtau / (tau - t), smooth integrand.
    const auto dmu = spectral_derivative(d.coarse);
    std::vector<double> re(m), im(m);
    for (int i = 0; i < m; ++i) {
      Complex s{};
      for (int j = 0; j < m; ++j) {
        s += (j == i) ? dmu[i] * (2.0 * pi / m)
                      : (d.coarse[j] - d.coarse[i]) / (coarse.y[j] - coarse.y[i]) * coarse.dtau[j];
      }
      const Complex f = d.coarse[i] + s / Complex(0.0, 2.0 * pi);
      re[i] = f.real();
      im[i] = f.imag();
    }
    const auto re_f = upsample(re, upsample_factor), im_f = upsample(im, upsample_factor);
    d.holo_fine.resize(re_f.size());
    for (std::size_t i = 0; i < re_f.size(); ++i) d.holo_fine[i] = {re_f[i], im_f[i]};
    return d;
  }

  double evaluate(const Density& d, Complex x, double radial_fraction) const {
    const double gap = (1.0 - radial_fraction) * std::abs(x) / std::max(radial_fraction, 1e-300);
    if (gap > 6.0 * spacing || radial_fraction < 0.5) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += dl_kernel(x, coarse.y[j], coarse.normal[j]) * coarse.w[j] * d.coarse[j];
      return s;
    }
    // Close to the boundary: barycentric Cauchy formula on the upsampled nodes,
    // which stays accurate up to the curve.
    const int mf = static_cast<int>(fine.y.size());
    Complex num{}, den{};
    for (int j = 0; j < mf; ++j) {
      const Complex c = fine.dtau[j] / (fine.y[j] - x);
      num += d.holo_fine[j] * c;
      den += c;
    }
    return (num / den).real();
  }
};

// ---------------------------------------------------------------------------
// Domain model

struct DomainModel::Impl {
  DomainKind kind = DomainKind::unit_disk;
  double radius = 1.0;
  BoundaryCurve curve = BoundaryCurve::fourier({1.0}, {});
  std::optional<int> symmetry;
  std::shared_ptr<const NystromSolver> nystrom;
  double min_radius = 1.0;

  mutable std::mutex cache_mutex;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const NystromSolver::Density>> cache;

  std::shared_ptr<const NystromSolver::Density> green_density(Complex p) const {
    const auto key = std::make_pair(p.real(), p.imag());
    {
      std::lock_guard lock(cache_mutex);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto density = std::make_shared<const NystromSolver::Density>(
        nystrom->solve([p](Complex y) { return std::log(std::abs(y - p)) / (2.0 * pi); }));
    std::lock_guard lock(cache_mutex);
    if (cache.size() > 4096) cache.clear();
    cache.emplace(key, density);
    return density;
  }

  double boundary_radius(double theta) const {
    return kind == DomainKind::curve ? curve.radius(theta) : radius;
  }

  double radial_fraction(Complex x) const {
    const double r = std::abs(x);
    if (r == 0.0) return 0.0;
    return r / boundary_radius(std::arg(x));
  }
};

DomainModel DomainModel::unit_disk() {
  auto impl = std::make_shared<Impl>();
  impl->kind = DomainKind::unit_disk;
  return DomainModel(impl);
}

DomainModel DomainModel::scaled_disk(double radius) {
  if (!(radius > 0.0)) throw ArgumentError("scaled_disk: radius must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = DomainKind::scaled_disk;
  impl->radius = radius;
  impl->min_radius = radius;
  return DomainModel(impl);
}

DomainModel DomainModel::curve(BoundaryCurve curve, std::optional<int> symmetry_order, int boundary_nodes) {
  double rmin = 1e300;
  for (int i = 0; i < 2048; ++i) rmin = std::min(rmin, curve.radius(2.0 * pi * i / 2048));
  if (!(rmin > 0.0)) throw ArgumentError("curve domain: r(theta) must stay positive (0 must be interior)");
  auto impl = std::make_shared<Impl>();
  impl->kind = DomainKind::curve;
  impl->curve = curve;
  impl->symmetry = symmetry_order;
  impl->min_radius = rmin;
  impl->nystrom = std::make_shared<const NystromSolver>(curve, boundary_nodes);
  DomainModel model(impl);
  if (symmetry_order) {
    if (*symmetry_order < 1) throw ArgumentError("curve domain: symmetry order must be >= 1");
    if (!symmetry_check(model, *symmetry_order))
      throw ArgumentError("curve domain: declared rotational symmetry does not hold");
  }
  return model;
}

DomainKind DomainModel::kind() const { return impl_->kind; }
std::optional<int> DomainModel::symmetry_order() const { return impl_->symmetry; }
const BoundaryCurve& DomainModel::boundary() const { return impl_->curve; }
double DomainModel::disk_radius() const { return impl_->radius; }
double DomainModel::boundary_radius(double theta) const { return impl_->boundary_radius(theta); }
double DomainModel::min_boundary_radius() const { return impl_->min_radius; }
double DomainModel::radial_fraction(Complex x) const { return impl_->radial_fraction(x); }

double DomainModel::regular_part(Complex x, Complex p) const {
  if (impl_->radial_fraction(x) > 1.0 + 1e-12 || impl_->radial_fraction(p) > 1.0 + 1e-12)
    throw DomainError("regular_part: point outside the domain");
  if (impl_->kind != DomainKind::curve) {
    const double R = impl_->radius;
    return std::log(std::abs(1.0 - x * std::conj(p) / (R * R))) / (2.0 * pi) + std::log(R) / (2.0 * pi);
  }
  const double s = impl_->radial_fraction(x);
  if (s >= 1.0 - 1e-13) return std::log(std::abs(x - p)) / (2.0 * pi);
  return impl_->nystrom->evaluate(*impl_->green_density(p), x, s);
}

double DomainModel::green(Complex x, Complex p) const {
  if (impl_->radial_fraction(p) >= 1.0) throw DomainError("green: source must be interior");
  if (impl_->radial_fraction(x) > 1.0 + 1e-12) throw DomainError("green: point outside the domain");
  if (std::abs(x - p) < 1e-14) throw PoleError("green: x coincides with the source");
  if (impl_->radial_fraction(x) >= 1.0 - 1e-13) return 0.0;
  return -std::log(std::abs(x - p)) / (2.0 * pi) + regular_part(x, p);
}

// ---------------------------------------------------------------------------
// Harmonic extension

struct HarmonicExtension::Impl {
  std::function<double(Complex)> data;
  std::function<double(Complex)> radial_fraction;
  // Disk: u(x) = c0 + 2 Re sum_k c_k (x/R)^k.
  double radius = 1.0;
  std::vector<Complex> coeffs;
  // Curve.
  std::shared_ptr<const NystromSolver> nystrom;
  NystromSolver::Density density;
};

double HarmonicExtension::operator()(Complex x) const {
  const double s = impl_->radial_fraction(x);
  if (s > 1.0 + 1e-9) throw DomainError("harmonic extension: point outside the domain");
  if (s >= 1.0 - 1e-13) return impl_->data(x);
  if (impl_->nystrom) return impl_->nystrom->evaluate(impl_->density, x, s);
  const Complex z = x / impl_->radius;
  Complex acc{};
  for (std::size_t k = impl_->coeffs.size(); k-- > 1;) acc = (acc + impl_->coeffs[k]) * z;
  return impl_->coeffs[0].real() + 2.0 * acc.real();
}

HarmonicExtension DomainModel::extend(std::function<double(Complex)> boundary_data) const {
  auto ext = std::make_shared<HarmonicExtension::Impl>();
  ext->data = boundary_data;
  auto impl = impl_;
  ext->radial_fraction = [impl](Complex x) { return impl->radial_fraction(x); };
  if (impl_->kind == DomainKind::curve) {
    ext->nystrom = impl_->nystrom;
    ext->density = impl_->nystrom->solve(boundary_data);
    return HarmonicExtension(ext);
  }
  constexpr int m = 256;
  const double R = impl_->radius;
  std::vector<double> g(m);
  for (int j = 0; j < m; ++j) g[j] = boundary_data(std::polar(R, 2.0 * pi * j / m));
  std::vector<Complex> c(m / 2);
  double scale = 0.0;
  for (int k = 0; k < m / 2; ++k) {
    Complex s{};
    for (int j = 0; j < m; ++j) s += g[j] * std::polar(1.0, -2.0 * pi * double(k) * j / m);
    c[k] = s / double(m);
    scale = std::max(scale, std::abs(c[k]));
  }
  std::size_t keep = 1;
  for (std::size_t k = 1; k < c.size(); ++k)
    if (std::abs(c[k]) > 1e-17 * std::max(scale, 1e-300)) keep = k + 1;
  c.resize(keep);
  ext->radius = R;
  ext->coeffs = std::move(c);
  return HarmonicExtension(ext);
}

bool symmetry_check(const DomainModel& domain, int order) {
  if (order < 1) throw ArgumentError("symmetry_check: order must be >= 1");
  if (domain.kind() != DomainKind::curve) return true;
  double scale = 0.0, gap = 0.0;
  for (int i = 0; i < 1024; ++i) {
    const double t = 2.0 * pi * i / 1024;
    const double r = domain.boundary_radius(t);
    scale = std::max(scale, r);
    gap = std::max(gap, std::abs(r - domain.boundary_radius(t + 2.0 * pi / order)));
  }
  return gap <= 1e-10 * scale;
}

std::vector<Complex> roots_of_b(Complex b, int alpha) {
  if (alpha < 1) throw ArgumentError("roots_of_b: alpha must be >= 1");
  std::vector<Complex> roots(alpha);
  const Complex principal = (b == Complex{}) ? Complex{} : std::polar(std::pow(std::abs(b), 1.0 / alpha),
                                                                      std::arg(b) / alpha);
  for (int k = 0; k < alpha; ++k) roots[k] = principal * std::polar(1.0, 2.0 * pi * k / alpha);
  return roots;
}

// ---------------------------------------------------------------------------
// Holomorphic derivative data

namespace {

// d^k H~/dx^k at 0 for k = 1..k_max from circle Fourier coefficients of h.
std::vector<Complex> circle_derivatives(const std::function<double(Complex)>& h, double rho, int k_max) {
  constexpr int q = 64;
  std::vector<double> values(q);
  for (int j = 0; j < q; ++j) values[j] = h(std::polar(rho, 2.0 * pi * j / q));
  std::vector<Complex> d(k_max + 1);
  for (int k = 1; k <= k_max; ++k) {
    Complex s{};
    for (int j = 0; j < q; ++j) s += values[j] * std::polar(1.0, -2.0 * pi * double(k) * j / q);
    s *= 2.0 * pi / q;
    d[k] = factorial(k) / (pi * std::pow(rho, k)) * s;
  }
  return d;
}

}  // namespace

KernelData holomorphic_derivatives(const DomainModel& domain, int k_max, int alpha) {
  if (k_max < 2) throw ArgumentError("holomorphic_derivatives: k_max must be >= 2");
  if (alpha < 1) throw ArgumentError("holomorphic_derivatives: alpha must be >= 1");
  KernelData kd{.domain = domain};
  kd.alpha = alpha;
  kd.k_max = k_max;
  kd.robin_origin = domain.regular_part(0.0, 0.0);
  const double rmin = domain.min_boundary_radius();
  const double rho1 = 0.3 * rmin, rho2 = 0.15 * rmin;

  auto tracked = [&kd](const std::vector<Complex>& a, const std::vector<Complex>& b, double weight) {
    for (std::size_t k = 1; k < a.size(); ++k) {
      const double gap = std::abs(a[k] - b[k]) / (weight * std::max(1.0, std::abs(a[k])));
      kd.conditioning = std::max(kd.conditioning, gap);
    }
  };

  auto h0 = [&](Complex x) { return domain.regular_part(x, 0.0); };
  kd.holo_dx = circle_derivatives(h0, rho1, k_max);
  tracked(kd.holo_dx, circle_derivatives(h0, rho2, k_max), 1.0);

  // Mixed data: D_k(p) = d^k H~/dx^k (0,p) is harmonic in p, so it splits into a
  // holomorphic and an antiholomorphic part; their alpha-th Taylor coefficients
  // are read off the e^{+i alpha psi} and e^{-i alpha psi} modes on a p-circle.
  const int k_mixed = std::max(alpha, 1);
  auto mixed_at = [&](double sigma, std::vector<Complex>& holo, std::vector<Complex>& anti) {
    constexpr int qp = 32;
    holo.assign(k_mixed + 1, Complex{});
    anti.assign(k_mixed + 1, Complex{});
    for (int m = 0; m < qp; ++m) {
      const double psi = 2.0 * pi * m / qp;
      const Complex p = std::polar(sigma, psi);
      const auto d = circle_derivatives([&](Complex x) { return domain.regular_part(x, p); }, rho1, k_mixed);
      for (int k = 1; k <= k_mixed; ++k) {
        holo[k] += d[k] * std::polar(1.0, -alpha * psi);
        anti[k] += d[k] * std::polar(1.0, alpha * psi);
      }
    }
    const double scale = factorial(alpha) / (std::pow(sigma, alpha) * qp);
    for (int k = 1; k <= k_mixed; ++k) {
      holo[k] *= scale;
      anti[k] *= scale;
    }
  };
  std::vector<Complex> holo2, anti2;
  mixed_at(0.25 * rmin, kd.mixed, kd.mixed_conj);
  mixed_at(0.125 * rmin, holo2, anti2);
  tracked(kd.mixed, holo2, 1.0);
  tracked(kd.mixed_conj, anti2, 1.0);

  if (kd.conditioning > 1e-4)
    throw ConditioningError("holomorphic_derivatives: two-radius extraction disagrees (" +
                            std::to_string(kd.conditioning) + ")");
  return kd;
}

double sum_over_roots_expansion_check(const KernelData& kd, Complex b, Complex x) {
  const int alpha = kd.alpha;
  const auto roots = roots_of_b(b, alpha);
  double direct = 0.0;
  for (const Complex beta : roots) direct += kd.domain.regular_part(x, beta) - kd.domain.regular_part(0.0, beta);
  double model = 0.0;
  Complex xk{1.0, 0.0};
  for (int k = 1; k <= kd.k_max; ++k) {
    xk *= x;
    model += alpha * (kd.holo_dx[k] * xk).real() / factorial(k);
    if (k <= alpha) {
      const Complex shift = kd.mixed[k] * b + kd.mixed_conj[k] * std::conj(b);
      model += (shift * xk).real() / (factorial(k) * factorial(alpha - 1));
    }
  }
  return std::abs(direct - model);
}

// ---------------------------------------------------------------------------
// Potential

PotentialModel PotentialModel::quadratic(double a0, Complex grad, double a11, double a22, double a12) {
  PotentialModel p;
  p.a_ = [=](Complex x) {
    const double x1 = x.real(), x2 = x.imag();
    return a0 + grad.real() * x1 + grad.imag() * x2 + 0.5 * (a11 * x1 * x1 + 2.0 * a12 * x1 * x2 + a22 * x2 * x2);
  };
  p.a0_ = a0;
  p.grad_ = grad;
  p.a11_ = a11;
  p.a22_ = a22;
  p.a12_ = a12;
  p.description_ = "quadratic";
  return p;
}

PotentialModel PotentialModel::expression(const std::string& expr, double a0, Complex grad, double a11,
                                          double a22, double a12) {
  Expression e(expr);
  PotentialModel p = custom([e](Complex x) { return e(x); }, a0, grad, a11, a22, a12);
  p.description_ = expr;
  return p;
}

PotentialModel PotentialModel::custom(std::function<double(Complex)> a, double a0, Complex grad, double a11,
                                      double a22, double a12) {
  PotentialModel p;
  p.a_ = std::move(a);
  p.a0_ = a0;
  p.grad_ = grad;
  p.a11_ = a11;
  p.a22_ = a22;
  p.a12_ = a12;
  p.description_ = "custom";
  return p;
}

double PotentialModel::derivative_mismatch(double h) const {
  const auto& a = a_;
  const Complex e1{h, 0.0}, e2{0.0, h};
  const double f0 = a(0.0);
  const double g1 = (a(e1) - a(-e1)) / (2.0 * h);
  const double g2 = (a(e2) - a(-e2)) / (2.0 * h);
  const double h11 = (a(e1) - 2.0 * f0 + a(-e1)) / (h * h);
  const double h22 = (a(e2) - 2.0 * f0 + a(-e2)) / (h * h);
  const double h12 = (a(e1 + e2) - a(e1 - e2) - a(e2 - e1) + a(-e1 - e2)) / (4.0 * h * h);
  return std::max({std::abs(f0 - a0_), std::abs(g1 - grad_.real()), std::abs(g2 - grad_.imag()),
                   std::abs(h11 - a11_), std::abs(h22 - a22_), std::abs(h12 - a12_)});
}

double PotentialModel::sampled_minimum(const DomainModel& domain) const {
  double m = 1e300;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j < 64; ++j) {
      const double th = 2.0 * pi * j / 64;
      m = std::min(m, a_(std::polar(domain.boundary_radius(th) * i / 40.0, th)));
    }
  return m;
}

void PotentialModel::validate(const DomainModel& domain, double tol) const {
  if (!(sampled_minimum(domain) > 0.0)) throw ArgumentError("potential: a must be positive on the domain");
  const double mismatch = derivative_mismatch();
  if (!(mismatch <= tol))
    throw ArgumentError("potential: declared derivative data differ from finite differences by " +
                        std::to_string(mismatch));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw UsageError(path + "." + key + ": missing");
  return j.at(key);
}

double number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw UsageError(path + ": expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw UsageError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

DomainModel domain_from_json(const nlohmann::json& spec, const std::string& path) {
  if (!spec.is_object()) throw UsageError(path + ": expected an object");
  const auto& kind_j = require(spec, "kind", path);
  if (!kind_j.is_string()) throw UsageError(path + ".kind: expected a string");
  const std::string kind = kind_j.get<std::string>();
  std::optional<int> sym;
  if (spec.contains("symmetry_order")) {
    if (!spec["symmetry_order"].is_number_integer()) throw UsageError(path + ".symmetry_order: expected an integer");
    sym = spec["symmetry_order"].get<int>();
  }
  try {
    if (kind == "unit_disk") return DomainModel::unit_disk();
    if (kind == "scaled_disk") return DomainModel::scaled_disk(number(require(spec, "radius", path), path + ".radius"));
    if (kind == "curve") {
      auto c = numbers(require(spec, "fourier_cos", path), path + ".fourier_cos");
      std::vector<double> s;
      if (spec.contains("fourier_sin")) s = numbers(spec["fourier_sin"], path + ".fourier_sin");
      return DomainModel::curve(BoundaryCurve::fourier(c, s), sym);
    }
    if (kind == "ellipse") {
      return DomainModel::curve(BoundaryCurve::ellipse(number(require(spec, "a", path), path + ".a"),
                                                       number(require(spec, "b", path), path + ".b")),
                                sym);
    }
  } catch (const ArgumentError& e) {
    throw UsageError(path + ": " + e.what());
  }
  throw UsageError(path + ".kind: unknown domain kind '" + kind + "'");
}

nlohmann::json domain_to_json(const DomainModel& domain) {
  nlohmann::json j;
  switch (domain.kind()) {
    case DomainKind::unit_disk: j["kind"] = "unit_disk"; break;
    case DomainKind::scaled_disk:
      j["kind"] = "scaled_disk";
      j["radius"] = domain.disk_radius();
      break;
    case DomainKind::curve:
      j["kind"] = "curve";
      j["fourier_cos"] = domain.boundary().cos_coeffs();
      j["fourier_sin"] = domain.boundary().sin_coeffs();
      if (domain.boundary().is_ellipse()) j = {{"kind", "ellipse"}};
      if (auto s = domain.symmetry_order()) j["symmetry_order"] = *s;
      break;
  }
  return j;
}

PotentialModel potential_from_json(const nlohmann::json& spec, const std::string& path) {
  if (!spec.is_object()) throw UsageError(path + ": expected an object");
  const double a0 = number(require(spec, "a0", path), path + ".a0");
  Complex grad{};
  if (spec.contains("grad")) {
    const auto g = numbers(spec["grad"], path + ".grad");
    if (g.size() != 2) throw UsageError(path + ".grad: expected two entries");
    grad = {g[0], g[1]};
  }
  const double a11 = spec.contains("a11") ? number(spec["a11"], path + ".a11") : 0.0;
  const double a22 = spec.contains("a22") ? number(spec["a22"], path + ".a22") : 0.0;
  const double a12 = spec.contains("a12") ? number(spec["a12"], path + ".a12") : 0.0;
  const std::string profile = spec.value("profile", std::string("quadratic"));
  if (profile == "quadratic") return PotentialModel::quadratic(a0, grad, a11, a22, a12);
  if (profile == "expr") {
    const auto& e = require(spec, "expr", path);
    if (!e.is_string()) throw UsageError(path + ".expr: expected a string");
    try {
      return PotentialModel::expression(e.get<std::string>(), a0, grad, a11, a22, a12);
    } catch (const ArgumentError& err) {
      throw UsageError(path + ".expr: " + err.what());
    }
  }
  throw UsageError(path + ".profile: expected \"quadratic\" or \"expr\"");
}

}  // namespace liouville::geometry
