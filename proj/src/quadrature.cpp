#include "liouville/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "liouville/parallel.hpp"

namespace liouville::quadrature {
namespace {

// Full 15-point Kronrod rule on [-1,1] with the embedded 7-point Gauss weights
// (zero where the node is not a Gauss node).
struct KronrodRule {
  std::array<double, 15> node{};
  std::array<double, 15> kronrod{};
  std::array<double, 15> gauss{};
};

const KronrodRule& kronrod_rule() {
  static const KronrodRule rule = [] {
    namespace bq = boost::math::quadrature;
    const auto& kx = bq::gauss_kronrod<double, 15>::abscissa();
    const auto& kw = bq::gauss_kronrod<double, 15>::weights();
    const auto& gw = bq::gauss<double, 7>::weights();
    KronrodRule r;
    for (int i = 0; i < 15; ++i) {
      const int m = std::abs(i - 7);
      r.node[i] = (i < 7 ? -1.0 : 1.0) * kx[m];
      r.kronrod[i] = kw[m];
      r.gauss[i] = (m % 2 == 0) ? gw[m / 2] : 0.0;
    }
    return r;
  }();
  return rule;
}

struct Cell {
  double r0, r1, t0, t1;
  double value = 0.0;
  double error = 0.0;
  std::size_t index = 0;
};

void evaluate_cell(const PlaneFunction& f, Cell& cell) {
  const auto& rule = kronrod_rule();
  const double rc = 0.5 * (cell.r0 + cell.r1), rh = 0.5 * (cell.r1 - cell.r0);
  const double tc = 0.5 * (cell.t0 + cell.t1), th = 0.5 * (cell.t1 - cell.t0);
  std::array<Complex, 15> dir;
  for (int j = 0; j < 15; ++j) dir[j] = std::polar(1.0, tc + th * rule.node[j]);
  double k_sum = 0.0, g_sum = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double r = rc + rh * rule.node[i];
    double k_row = 0.0, g_row = 0.0;
    for (int j = 0; j < 15; ++j) {
      const double v = f(r * dir[j]);
      k_row += rule.kronrod[j] * v;
      g_row += rule.gauss[j] * v;
    }
    k_sum += rule.kronrod[i] * r * k_row;
    g_sum += rule.gauss[i] * r * g_row;
  }
  cell.value = rh * th * k_sum;
  cell.error = std::abs(rh * th * (k_sum - g_sum));
}

struct WorstFirst {
  const std::vector<Cell>* cells;
  bool operator()(std::size_t a, std::size_t b) const {
    const Cell& ca = (*cells)[a];
    const Cell& cb = (*cells)[b];
    if (ca.error != cb.error) return ca.error < cb.error;
    return ca.index > cb.index;
  }
};

// Sampled estimate of the tail beyond radius R assuming f ~ c(theta) rho^-power.
// Returns {signed tail estimate, bound using max |f|}.
std::pair<double, double> tail_estimate(const PlaneFunction& f, double R, double power) {
  constexpr int samples = 64;
  double mean = 0.0, peak = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double v = f(std::polar(R, 2.0 * pi * (k + 0.5) / samples));
    mean += v;
    peak = std::max(peak, std::abs(v));
  }
  mean /= samples;
  const double factor = 2.0 * pi * R * R / (power - 2.0);
  return {factor * mean, factor * peak};
}

}  // namespace

QuadratureResult integrate_plane(const PlaneFunction& f, DecayProfile decay, double tol,
                                 const PlaneOptions& options) {
  if (!(decay.power > 2.0)) throw ArgumentError("integrate_plane: decay power must exceed 2");
  if (!(tol > 0.0)) throw ArgumentError("integrate_plane: tolerance must be positive");

  double R = 8.0;
  auto [tail, tail_bound] = tail_estimate(f, R, decay.power);
  while (tail_bound > 0.1 * tol && R < options.max_radius) {
    R *= 2.0;
    std::tie(tail, tail_bound) = tail_estimate(f, R, decay.power);
  }
  const double tail_error = 0.1 * tail_bound;

  std::vector<double> radii{0.0};
  for (double r = decay.singular_origin ? std::ldexp(1.0, -10) : 0.0625; r < R; r *= 2.0)
    radii.push_back(r);
  radii.push_back(R);

  std::vector<Cell> cells;
  std::vector<char> alive;
  const int na = std::max(1, options.angular_panels);
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    for (int a = 0; a < na; ++a)
      cells.push_back({radii[i], radii[i + 1], 2.0 * pi * a / na, 2.0 * pi * (a + 1) / na});
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].index = i;
  parallel_for(cells.size(), [&](std::size_t i) { evaluate_cell(f, cells[i]); });
  alive.assign(cells.size(), 1);

  std::priority_queue<std::size_t, std::vector<std::size_t>, WorstFirst> queue(WorstFirst{&cells});
  double total_error = tail_error;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    queue.push(i);
    total_error += cells[i].error;
  }

  auto finish_value = [&] {
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (alive[i]) values.push_back(cells[i].value);
    return pairwise_sum(values.data(), values.size()) + tail;
  };

  std::size_t splits = 0;
  while (total_error > tol) {
    if (cells.size() + 4 > options.max_cells) {
      throw QuadratureError("integrate_plane: refinement limit reached", finish_value(),
                            total_error);
    }
    const std::size_t worst = queue.top();
    queue.pop();
    alive[worst] = 0;
    const Cell parent = cells[worst];
    const double rm = 0.5 * (parent.r0 + parent.r1), tm = 0.5 * (parent.t0 + parent.t1);
    std::array<Cell, 4> kids{Cell{parent.r0, rm, parent.t0, tm}, Cell{rm, parent.r1, parent.t0, tm},
                             Cell{parent.r0, rm, tm, parent.t1}, Cell{rm, parent.r1, tm, parent.t1}};
    double child_error = 0.0;
    for (auto& kid : kids) {
      kid.index = cells.size();
      evaluate_cell(f, kid);
      child_error += kid.error;
      cells.push_back(kid);
      alive.push_back(1);
      queue.push(kid.index);
    }
    total_error += child_error - parent.error;
    if (++splits % 1024 == 0) {
      total_error = tail_error;
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (alive[i]) total_error += cells[i].error;
    }
  }

  QuadratureResult result;
  result.value = finish_value();
  result.error_estimate = std::max(0.0, total_error);
  result.cells_used = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), 1));
  return result;
}

std::pair<double, double> integrate_radial_with_error(const RadialProfile& g, double s,
                                                      double tol) {
  // exp_sinh probes rho far past the overflow of rho^2; a vanishing profile wins there.
  auto integrand = [&](double rho) {
    if (rho == 0.0) return 0.0;
    const double gv = g(rho);
    return gv == 0.0 ? 0.0 : std::pow(rho, 1.0 + s) * gv;
  };
  // A tail that does not decay faster than rho^-1 cannot be integrable.
  auto tail_mass = [&](double rho) { return std::abs(rho * integrand(rho)); };
  const double far = tail_mass(1e8), mid = tail_mass(1e4);
  if (!std::isfinite(far) || (far > 1e-12 && far >= 0.5 * mid))
    throw QuadratureError("integrate_radial: divergent tail", 0.0,
                          std::numeric_limits<double>::infinity());
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0, l1 = 0.0;
  const double value = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                            tol, &error, &l1);
  return {2.0 * pi * value, 2.0 * pi * error};
}

double integrate_radial(const RadialProfile& g, double s, double tol) {
  return integrate_radial_with_error(g, s, tol).first;
}

IdentityReport canonical_identities(int alpha, Complex xi, double tol) {
  if (alpha < 1) throw ArgumentError("canonical_identities: alpha must be >= 1");
  const double a = alpha;
  const double weight_power = 2.0 * a + 2.0;
  auto shifted = [alpha, xi](Complex y) { return ipow(y, alpha) - xi; };
  auto radial_weight = [alpha](Complex y) { return std::pow(std::abs(y), 2.0 * (alpha - 1)); };

  IdentityReport report;
  auto run = [&](const PlaneFunction& f, double power) {
    const auto r = integrate_plane(f, {power, false}, tol);
    report.max_error_estimate = std::max(report.max_error_estimate, r.error_estimate);
    return r.value;
  };
  report.id1 = run(
      [&](Complex y) {
        const double q = std::norm(shifted(y));
        return radial_weight(y) * std::log1p(q) * (1.0 - q) / std::pow(1.0 + q, 3);
      },
      weight_power);
  report.id2 = run(
      [&](Complex y) {
        const double q = std::norm(shifted(y));
        return radial_weight(y) * (1.0 - q) / std::pow(1.0 + q, 3);
      },
      weight_power);
  report.id3 = run(
      [&](Complex y) {
        const Complex z = shifted(y);
        return radial_weight(y) * z.real() * z.real() / std::pow(1.0 + std::norm(z), 4);
      },
      weight_power + 2.0 * a);
  report.id3_imag = run(
      [&](Complex y) {
        const Complex z = shifted(y);
        return radial_weight(y) * z.imag() * z.imag() / std::pow(1.0 + std::norm(z), 4);
      },
      weight_power + 2.0 * a);
  report.quantization = run(
      [&](Complex y) {
        const double q = std::norm(shifted(y));
        return 8.0 * a * a * radial_weight(y) / ((1.0 + q) * (1.0 + q));
      },
      weight_power);
  return report;
}

double change_of_variables_check(const PlaneFunction& f, int alpha, double decay_power, double tol) {
  if (alpha < 1) throw ArgumentError("change_of_variables_check: alpha must be >= 1");
  const double lifted_power = alpha * decay_power - 2.0 * (alpha - 1);
  const auto lhs = integrate_plane(
      [&](Complex y) { return std::pow(std::abs(y), 2.0 * (alpha - 1)) * f(ipow(y, alpha)); },
      {lifted_power, false}, tol);
  const auto rhs = integrate_plane(f, {decay_power, false}, tol);
  return std::abs(lhs.value - rhs.value / alpha);
}

std::pair<double, double> vanishing_moment_check(const PlaneFunction& f, int alpha, int gamma,
                                                 double decay_power, double tol) {
  if (alpha < 2) throw ArgumentError("vanishing_moment_check: alpha must be >= 2");
  if (gamma < 1 || gamma > alpha - 1)
    throw ArgumentError("vanishing_moment_check: gamma must lie in 1..alpha-1");
  const double power = alpha * decay_power - 2.0 * (alpha - 1) - gamma;
  auto moment = [&](bool imaginary) {
    return integrate_plane(
               [&](Complex y) {
                 const Complex m = ipow(y, gamma);
                 return std::pow(std::abs(y), 2.0 * (alpha - 1)) * f(ipow(y, alpha)) *
                        (imaginary ? m.imag() : m.real());
               },
               {power, false}, tol)
        .value;
  };
  return {moment(false), moment(true)};
}

}  // namespace liouville::quadrature
