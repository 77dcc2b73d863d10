#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "liouville/bubble.hpp"
#include "liouville/cli.hpp"
#include "liouville/discretization.hpp"
#include "liouville/geometry.hpp"
#include "liouville/quadrature.hpp"
#include "liouville/reduction.hpp"
#include "liouville/solver.hpp"

namespace liouville::cli {

using nlohmann::json;

namespace {

struct Output {
  std::filesystem::path dir;
  std::vector<std::string> header;

  std::string path(const std::string& name) const { return (dir / name).string(); }

  // One ladder per file: `# ` header lines, a column row, then data rows.
  void csv(const std::string& name, const std::vector<std::string>& columns,
           const std::vector<std::vector<double>>& rows) const {
    std::ofstream f(path(name));
    if (!f) throw Error("cannot write " + path(name));
    for (const auto& h : header) f << "# " << h << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
    f << '\n' << std::setprecision(17);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
      f << '\n';
    }
  }
};

json fit_json(const solver::SlopeFit& f) { return {{"slope", f.slope}, {"points", f.points}}; }

json identities(const RunConfig& c, const Output& out, std::ostream& log) {
  json res = json::array();
  std::vector<std::vector<double>> rows;
  const double tol = c.tolerances.quadrature;
  log << std::setw(6) << "alpha" << std::setw(16) << "id1" << std::setw(16) << "id2" << std::setw(16) << "id3"
      << std::setw(16) << "quantization" << '\n';
  for (const int alpha : c.alphas) {
    const auto r = quadrature::canonical_identities(alpha, c.xi, tol);
    const double gauss = quadrature::change_of_variables_check(
        [](Complex y) { return std::exp(-std::norm(y)); }, alpha, 40.0, tol);
    const double rational = quadrature::change_of_variables_check(
        [](Complex y) { return std::pow(1.0 + std::norm(y), -3); }, alpha, 6.0, tol);
    double moment = 0.0;
    for (int gamma = 1; gamma < alpha; ++gamma) {
      const auto [re, im] = quadrature::vanishing_moment_check(
          [](Complex w) { return std::pow(1.0 + std::norm(w), -3); }, alpha, gamma, 6.0, tol);
      moment = std::max({moment, std::abs(re), std::abs(im)});
    }
    res.push_back({{"alpha", alpha},
                   {"id1", r.id1},
                   {"id1_expected", -pi / (2.0 * alpha)},
                   {"id2", r.id2},
                   {"id3", r.id3},
                   {"id3_imag", r.id3_imag},
                   {"id3_expected", pi / (12.0 * alpha)},
                   {"quantization", r.quantization},
                   {"quantization_expected", 8.0 * pi * alpha},
                   {"change_of_variables_gaussian", gauss},
                   {"change_of_variables_rational", rational},
                   {"max_vanishing_moment", moment},
                   {"error_estimate", r.max_error_estimate}});
    rows.push_back({double(alpha), c.xi.real(), c.xi.imag(), r.id1, r.id2, r.id3, r.id3_imag, r.quantization, gauss,
                    rational, moment});
    log << std::setw(6) << alpha << std::setprecision(10) << ' ' << std::setw(15) << r.id1 << ' ' << std::setw(15)
        << r.id2 << ' ' << std::setw(15) << r.id3 << ' ' << std::setw(15) << r.quantization << '\n';
  }
  out.csv("ladder_identities.csv",
          {"alpha", "xi_re", "xi_im", "id1", "id2", "id3", "id3_imag", "quantization", "cov_gaussian",
           "cov_rational", "max_vanishing_moment"},
          rows);
  return res;
}

json kernels(const RunConfig& c, const Output& out, std::ostream& log) {
  const int alpha = c.N + 1;
  const auto domain = geometry::domain_from_json(c.domain);
  json res = json::array();
  std::vector<std::vector<double>> rows;
  std::vector<double> ds, rw, r0, r1;
  log << std::setw(8) << "delta" << std::setw(8) << "nodes" << std::setw(14) << "res_PW" << std::setw(14) << "res_PZ0"
      << std::setw(14) << "res_PZ1" << std::setw(14) << "|PZ1|^2" << std::setw(14) << "<PZ1,PZ2>" << '\n';
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    const double delta = c.deltas[i];
    const auto disc = discretization::build(domain, discretization::Resolution::for_bubble(delta, c.nodes_per_delta));
    const auto p = bubble::BubbleParams::make(alpha, delta, c.b * std::pow(delta, alpha));
    const auto pw = bubble::project_bubble(p, disc, true);
    const auto pz0 = bubble::project_kernel(p, 0, disc, true);
    const auto pz1 = bubble::project_kernel(p, 1, disc, true);
    const auto pz2 = bubble::project_kernel(p, 2, disc, true);
    const double n1 = discretization::h1_inner(pz1.field, pz1.field);
    const double n2 = discretization::h1_inner(pz2.field, pz2.field);
    const double n12 = discretization::h1_inner(pz1.field, pz2.field);
    const double e1 = std::max(*pz1.expansion_residual, *pz2.expansion_residual);
    res.push_back({{"delta", delta},
                   {"nodes", disc.node_count()},
                   {"residual_PW", *pw.expansion_residual},
                   {"residual_PZ0", *pz0.expansion_residual},
                   {"residual_PZ12", e1},
                   {"norm_PZ1_sq", n1},
                   {"norm_PZ2_sq", n2},
                   {"inner_PZ1_PZ2", n12},
                   {"norm_target", 2.0 / 3.0 * pi * alpha}});
    rows.push_back({delta, double(disc.node_count()), *pw.expansion_residual, *pz0.expansion_residual, e1, n1, n2, n12});
    ds.push_back(delta);
    rw.push_back(*pw.expansion_residual);
    r0.push_back(*pz0.expansion_residual);
    r1.push_back(e1);
    log << std::setw(8) << delta << std::setw(8) << disc.node_count() << std::setprecision(6) << std::setw(14)
        << *pw.expansion_residual << std::setw(14) << *pz0.expansion_residual << std::setw(14) << e1 << std::setw(14)
        << n1 << std::setw(14) << n12 << '\n';
    if (c.write_fields && i + 1 == c.deltas.size()) {
      discretization::write_mesh_csv(disc, out.path("mesh_nodes.csv"), out.path("mesh_cells.csv"), out.header);
      discretization::write_field_csv(pw.field, out.path("field_PW.csv"), out.header);
      discretization::write_field_csv(pz1.field, out.path("field_PZ1.csv"), out.header);
    }
  }
  out.csv("ladder_kernels.csv",
          {"delta", "nodes", "residual_PW", "residual_PZ0", "residual_PZ12", "norm_PZ1_sq", "norm_PZ2_sq",
           "inner_PZ1_PZ2"},
          rows);
  return {{"alpha", alpha},
          {"rows", res},
          {"slope_PW", fit_json(solver::fit_loglog(ds, rw))},
          {"slope_PZ0", fit_json(solver::fit_loglog(ds, r0))},
          {"slope_PZ12", fit_json(solver::fit_loglog(ds, r1))}};
}

json assumptions_json(const reduction::AssumptionReport& a) {
  return {{"theorem_case", reduction::to_string(a.theorem_case)},
          {"gradient_condition_residual", a.gradient_condition_residual},
          {"A", a.A_value},
          {"symmetry_ok", a.symmetry_ok},
          {"warnings", a.warnings}};
}

json reduction_scan(const RunConfig& c, const Output& out, std::ostream& log) {
  const int alpha = c.N + 1;
  const auto domain = geometry::domain_from_json(c.domain);
  const auto pot = geometry::potential_from_json(c.potential);
  const auto kd = geometry::holomorphic_derivatives(domain, alpha + 1, alpha);
  const auto report = reduction::check_assumptions(pot, kd, c.N);
  json res{{"alpha", alpha}, {"assumptions", assumptions_json(report)}};
  log << "theorem case: " << reduction::to_string(report.theorem_case) << ", A = " << report.A_value << '\n';
  if (alpha >= 2) {
    const double j0 = reduction::jacobian_at_zero(alpha, c.tolerances.quadrature);
    res["jacobian_at_zero"] = j0;
    std::vector<std::vector<double>> rows;
    for (int i = -4; i <= 4; ++i)
      for (int k = -4; k <= 4; ++k) {
        const Complex B(0.25 * i, 0.25 * k);
        const auto v = reduction::reduced_map_F(B, alpha, 1e-9, false);
        rows.push_back({B.real(), B.imag(), v.F[0], v.F[1]});
      }
    out.csv("ladder_reduced_map.csv", {"B1", "B2", "F1", "F2"}, rows);
    log << "DF(0) diagonal entry: " << std::setprecision(12) << j0 << '\n';
  }
  if (!c.lambda_ladder.empty()) {
    const double lambda = c.lambda_ladder.front();
    const double delta = bubble::delta_from_lambda(lambda, 0.0, pot, kd, alpha);
    const auto disc = discretization::build(domain, discretization::Resolution::for_bubble(delta, c.nodes_per_delta));
    const solver::ReductionContext ctx(pot, kd, disc);
    solver::ContractionOptions opts;
    opts.tol = c.tolerances.contraction;
    const auto map = solver::multiplier_map(ctx, lambda, opts);
    std::vector<std::vector<double>> rows;
    const double da = std::pow(delta, alpha);
    for (const double frac : {0.5, 1.0, c.search_radius_factor})
      for (int k = 0; k < 12; ++k) {
        const Complex b = std::polar(frac * da, 2.0 * pi * k / 12);
        try {
          const auto cc = map(b);
          rows.push_back({b.real(), b.imag(), cc[0], cc[1]});
        } catch (const Error& e) {
          rows.push_back({b.real(), b.imag(), NAN, NAN});
        }
      }
    out.csv("ladder_multipliers.csv", {"b1", "b2", "c1", "c2"}, rows);
    const auto p = bubble::BubbleParams::make(alpha, delta, 0.5 * da);
    if (alpha >= 2) {
      json forms = json::array();
      for (int j = 1; j <= 2; ++j) {
        const auto m = reduction::multiplier_leading_form(p, lambda, pot, kd, disc, j);
        forms.push_back({{"j", j}, {"computed", m.computed}, {"model", m.model}});
      }
      res["multiplier_leading_form"] = {{"lambda", lambda}, {"delta", delta}, {"B", 0.5}, {"values", forms}};
    }
    log << "multiplier scan at lambda = " << lambda << ": " << rows.size() << " points\n";
  }
  return res;
}

json continuation(const RunConfig& c, const Output& out, std::ostream& log) {
  const auto domain = geometry::domain_from_json(c.domain);
  const auto pot = geometry::potential_from_json(c.potential);
  solver::ContinuationConfig cc;
  cc.nodes_per_delta = c.nodes_per_delta;
  cc.contraction.tol = c.tolerances.contraction;
  cc.root_search.tol_c = c.tolerances.multiplier;
  cc.root_search.search_radius_factor = c.search_radius_factor;
  cc.force = c.force;
  if (c.write_fields)
    cc.on_solution = [&](const solver::ContinuationRow&, const solver::Ansatz& a, const solver::ReducedState& st,
                         const solver::AssembledSolution& sol) {
      // Later rungs overwrite earlier ones: the files hold the smallest lambda solved.
      const auto& disc = a.pw.field.disc();
      discretization::write_mesh_csv(disc, out.path("mesh_nodes.csv"), out.path("mesh_cells.csv"), out.header);
      discretization::write_field_csv(sol.v, out.path("field_v.csv"), out.header);
      discretization::write_field_csv(st.phi, out.path("field_phi.csv"), out.header);
    };
  const auto report = solver::continuation(domain, pot, c.N, c.lambda_ladder, cc);
  const int alpha = c.N + 1;
  json rows = json::array();
  std::vector<std::vector<double>> csv;
  log << std::setw(10) << "lambda" << std::setw(10) << "delta" << std::setw(14) << "|b*|" << std::setw(12) << "|phi|"
      << std::setw(12) << "mass" << std::setw(12) << "farfield" << std::setw(6) << "it" << "  status\n";
  for (const auto& r : report.rows) {
    rows.push_back({{"lambda", r.lambda},
                    {"delta", r.delta},
                    {"b_star", {r.b_star.real(), r.b_star.imag()}},
                    {"phi_norm", r.phi_norm},
                    {"mass", r.mass},
                    {"local_mass", r.local_mass},
                    {"farfield_error", r.farfield_error},
                    {"inv_norm_estimate", r.inv_norm_estimate},
                    {"energy", r.energy},
                    {"multiplier_norm", r.multiplier_norm},
                    {"iterations", r.iterations},
                    {"map_evaluations", r.map_evaluations},
                    {"mesh_nodes", r.mesh_nodes},
                    {"outside_ball", r.outside_ball},
                    {"error", r.error}});
    csv.push_back({r.lambda, r.delta, r.b_star.real(), r.b_star.imag(), r.phi_norm, r.mass, r.local_mass,
                   r.farfield_error, r.inv_norm_estimate, r.energy, r.multiplier_norm, double(r.iterations),
                   r.error.empty() ? 1.0 : 0.0});
    log << std::setw(10) << r.lambda << std::setw(10) << std::setprecision(4) << r.delta << std::setw(14)
        << std::abs(r.b_star) << std::setw(12) << r.phi_norm << std::setw(12) << r.mass << std::setw(12)
        << r.farfield_error << std::setw(6) << r.iterations << "  " << (r.error.empty() ? "ok" : r.error) << '\n';
  }
  out.csv("ladder_continuation.csv",
          {"lambda", "delta", "b1", "b2", "phi_norm", "mass", "local_mass", "farfield_error", "inv_norm_estimate",
           "energy", "multiplier_norm", "iterations", "ok"},
          csv);
  return {{"alpha", alpha},
          {"mass_target", 8.0 * pi * alpha},
          {"assumptions", assumptions_json(report.assumptions)},
          {"rows", rows},
          {"phi_slope", fit_json(report.phi_slope)},
          {"b_slope", fit_json(report.b_slope)},
          {"mass_gap_slope", fit_json(report.mass_gap_slope)},
          {"farfield_slope", fit_json(report.farfield_slope)}};
}

}  // namespace

int run(const RunConfig& config, std::ostream& log) {
  const auto hash = config_hash(config);
  Output out{config.output_dir, {version_string, "config " + hash}};
  std::filesystem::create_directories(out.dir);
  const auto start = std::chrono::steady_clock::now();
  json results;
  int code = exit_ok;
  std::string failure;
  log << version_string << "  experiment " << to_string(config.experiment) << "  config " << hash << '\n';
  try {
    switch (config.experiment) {
      case Experiment::identities: results = identities(config, out, log); break;
      case Experiment::kernels: results = kernels(config, out, log); break;
      case Experiment::reduction_scan: results = reduction_scan(config, out, log); break;
      case Experiment::continuation: results = continuation(config, out, log); break;
    }
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    failure = e.what();
    code = exit_numerical + static_cast<int>(config.experiment);
    log << "error: " << failure << '\n';
  }
  json report{{"version", version_string},
              {"config_hash", hash},
              {"config", config.to_json()},
              {"experiment", to_string(config.experiment)},
              {"results", results},
              {"status", code == exit_ok ? "ok" : "failed"},
              {"error", failure}};
  report["config"].erase("output_dir");
  std::ofstream f(out.path("report.json"));
  f << report.dump(2) << '\n';
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << "wrote " << out.dir.string() << " in " << std::setprecision(3) << secs << " s\n";
  return code;
}

}  // namespace liouville::cli
