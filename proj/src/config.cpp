#include <algorithm>
#include <cstdio>
#include <fstream>

#include "liouville/cli.hpp"
#include "liouville/geometry.hpp"

namespace liouville::cli {

using nlohmann::json;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::identities: return "identities";
    case Experiment::kernels: return "kernels";
    case Experiment::reduction_scan: return "reduction_scan";
    case Experiment::continuation: return "continuation";
  }
  return "identities";
}

Experiment experiment_from_string(const std::string& name, const std::string& path) {
  for (auto e : {Experiment::identities, Experiment::kernels, Experiment::reduction_scan, Experiment::continuation})
    if (to_string(e) == name) return e;
  throw UsageError(path + ": unknown experiment '" + name + "'");
}

namespace {

double positive(const json& j, const std::string& path) {
  if (!j.is_number()) throw UsageError(path + ": expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0)) throw UsageError(path + ": must be positive");
  return v;
}

Complex complex_of(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw UsageError(path + ": expected a number or a pair [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
std::vector<T> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) throw UsageError(path + ": expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if constexpr (std::is_integral_v<T>) {
      if (!j[i].is_number_integer()) throw UsageError(p + ": expected an integer");
    } else {
      if (!j[i].is_number()) throw UsageError(p + ": expected a number");
    }
    out.push_back(j[i].get<T>());
  }
  return out;
}

const std::vector<std::string> known_keys = {"experiment", "domain", "potential", "N", "lambda_ladder", "alphas",
                                             "xi", "deltas", "b", "tolerances", "nodes_per_delta",
                                             "search_radius_factor", "force", "write_fields", "output_dir"};

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end())
      throw UsageError(key + ": unknown configuration key");
  RunConfig c;
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw UsageError("experiment: required string");
  c.experiment = experiment_from_string(j["experiment"].get<std::string>());
  if (j.contains("domain")) {
    c.domain = j["domain"];
    geometry::domain_from_json(c.domain, "domain");
  }
  if (j.contains("potential")) {
    c.potential = j["potential"];
    geometry::potential_from_json(c.potential, "potential");
  }
  if (j.contains("N")) {
    if (!j["N"].is_number_integer()) throw UsageError("N: expected an integer");
    c.N = j["N"].get<int>();
  }
  if (c.N < 1) throw UsageError("N: must be >= 1");
  if (j.contains("lambda_ladder")) c.lambda_ladder = number_list<double>(j["lambda_ladder"], "lambda_ladder");
  for (std::size_t i = 0; i < c.lambda_ladder.size(); ++i) {
    const std::string p = "lambda_ladder[" + std::to_string(i) + "]";
    if (!(c.lambda_ladder[i] > 0.0)) throw UsageError(p + ": must be positive");
    if (i > 0 && !(c.lambda_ladder[i] < c.lambda_ladder[i - 1])) throw UsageError(p + ": ladder must strictly decrease");
  }
  if (c.experiment == Experiment::continuation && c.lambda_ladder.empty())
    throw UsageError("lambda_ladder: must not be empty for a continuation run");
  if (j.contains("alphas")) c.alphas = number_list<int>(j["alphas"], "alphas");
  for (std::size_t i = 0; i < c.alphas.size(); ++i)
    if (c.alphas[i] < 1) throw UsageError("alphas[" + std::to_string(i) + "]: must be >= 1");
  if (j.contains("xi")) c.xi = complex_of(j["xi"], "xi");
  if (j.contains("b")) c.b = complex_of(j["b"], "b");
  if (j.contains("deltas")) c.deltas = number_list<double>(j["deltas"], "deltas");
  for (std::size_t i = 0; i < c.deltas.size(); ++i)
    if (!(c.deltas[i] > 0.0)) throw UsageError("deltas[" + std::to_string(i) + "]: must be positive");
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (!t.is_object()) throw UsageError("tolerances: expected an object");
    for (const auto& [key, value] : t.items()) {
      const std::string p = "tolerances." + key;
      if (key == "quadrature") c.tolerances.quadrature = positive(value, p);
      else if (key == "contraction") c.tolerances.contraction = positive(value, p);
      else if (key == "multiplier") {
        // 0 selects the alpha-dependent default.
        if (!value.is_number() || !(value.get<double>() >= 0.0)) throw UsageError(p + ": must be >= 0");
        c.tolerances.multiplier = value.get<double>();
      }
      else throw UsageError(p + ": unknown tolerance");
    }
  }
  if (j.contains("nodes_per_delta")) c.nodes_per_delta = positive(j["nodes_per_delta"], "nodes_per_delta");
  if (j.contains("search_radius_factor"))
    c.search_radius_factor = positive(j["search_radius_factor"], "search_radius_factor");
  for (const char* key : {"force", "write_fields"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_boolean()) throw UsageError(std::string(key) + ": expected a boolean");
    (std::string(key) == "force" ? c.force : c.write_fields) = j[key].get<bool>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw UsageError("output_dir: expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw UsageError("config: " + std::string(e.what()));
  }
  return parse_config(j);
}

void scale_tolerances(RunConfig& c, double factor) {
  if (!(factor > 0.0)) throw UsageError("--tol-scale: must be positive");
  c.tolerances.quadrature *= factor;
  c.tolerances.contraction *= factor;
  if (c.tolerances.multiplier > 0.0) c.tolerances.multiplier *= factor;
  else c.tolerances.multiplier = 1e-9 * (2.0 / 3.0) * pi * (c.N + 1) * factor;
}

json RunConfig::to_json() const {
  return json{{"experiment", to_string(experiment)},
              {"domain", domain},
              {"potential", potential},
              {"N", N},
              {"lambda_ladder", lambda_ladder},
              {"alphas", alphas},
              {"xi", {xi.real(), xi.imag()}},
              {"deltas", deltas},
              {"b", {b.real(), b.imag()}},
              {"tolerances",
               {{"quadrature", tolerances.quadrature},
                {"contraction", tolerances.contraction},
                {"multiplier", tolerances.multiplier}}},
              {"nodes_per_delta", nodes_per_delta},
              {"search_radius_factor", search_radius_factor},
              {"force", force},
              {"write_fields", write_fields},
              {"output_dir", output_dir}};
}

std::string config_hash(const RunConfig& config) {
  // The output location does not change the results, so it stays out of the hash.
  auto j = config.to_json();
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace liouville::cli
