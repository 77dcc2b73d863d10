#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "liouville/cli.hpp"

using namespace liouville;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string usage_message(const json& j) {
  try {
    cli::parse_config(j);
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("liouville_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(LIOUVILLE_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(ParseConfig, DefaultsAndRoundTrip) {
  const auto c = cli::parse_config(json{{"experiment", "identities"}});
  EXPECT_EQ(c.experiment, cli::Experiment::identities);
  EXPECT_EQ(c.alphas, (std::vector<int>{1, 2, 3, 4}));
  const auto again = cli::parse_config(c.to_json());
  EXPECT_EQ(cli::config_hash(c), cli::config_hash(again));
  EXPECT_EQ(cli::experiment_from_string("reduction_scan"), cli::Experiment::reduction_scan);
  EXPECT_EQ(cli::to_string(cli::Experiment::continuation), "continuation");
}

TEST(ParseConfig, ErrorsNameTheFieldPath) {
  EXPECT_NE(usage_message(json{{"experiment", "bogus"}}).find("experiment"), std::string::npos);
  EXPECT_NE(usage_message(json{{"experiment", "identities"}, {"colour", 1}}).find("colour"), std::string::npos);
  EXPECT_NE(usage_message(json{{"experiment", "identities"}, {"alphas", {1, "x"}}}).find("alphas[1]"),
            std::string::npos);
  EXPECT_NE(usage_message(json{{"experiment", "continuation"}, {"lambda_ladder", {1e-2, 1e-1}}})
                .find("lambda_ladder[1]"),
            std::string::npos);
  EXPECT_NE(usage_message(json{{"experiment", "continuation"}, {"lambda_ladder", json::array()}}).find("lambda_ladder"),
            std::string::npos);
  EXPECT_NE(usage_message(json{{"experiment", "kernels"}, {"N", 0}}).find("N"), std::string::npos);
  EXPECT_NE(usage_message(json{{"experiment", "kernels"}, {"tolerances", {{"speed", 1.0}}}}).find("tolerances.speed"),
            std::string::npos);
  EXPECT_NE(usage_message(json{{"experiment", "kernels"}, {"domain", {{"kind", "annulus"}}}}).find("domain.kind"),
            std::string::npos);
  EXPECT_NE(usage_message(json::array()).find("config"), std::string::npos);
}

TEST(ConfigHash, StableAndSensitive) {
  const auto a = cli::parse_config(json{{"experiment", "identities"}, {"output_dir", "x"}});
  const auto b = cli::parse_config(json{{"experiment", "identities"}, {"output_dir", "y"}});
  const auto c = cli::parse_config(json{{"experiment", "identities"}, {"alphas", {1, 2}}});
  EXPECT_EQ(cli::config_hash(a).size(), 16u);
  EXPECT_EQ(cli::config_hash(a), cli::config_hash(b));
  EXPECT_NE(cli::config_hash(a), cli::config_hash(c));
}

TEST(ScaleTolerances, MultipliesAndValidates) {
  auto c = cli::parse_config(json{{"experiment", "identities"}});
  cli::scale_tolerances(c, 10.0);
  EXPECT_DOUBLE_EQ(c.tolerances.quadrature, 1e-10);
  EXPECT_DOUBLE_EQ(c.tolerances.contraction, 1e-10);
  EXPECT_THROW(cli::scale_tolerances(c, 0.0), UsageError);
}

TEST(Run, IdentitiesAreByteReproducible) {
  const auto d1 = scratch_dir("a"), d2 = scratch_dir("b");
  auto c = cli::parse_config(json{{"experiment", "identities"}, {"alphas", {1, 2}}, {"xi", {0.5, 0.25}}});
  std::ostringstream log;
  c.output_dir = d1.string();
  ASSERT_EQ(cli::run(c, log), cli::exit_ok);
  c.output_dir = d2.string();
  ASSERT_EQ(cli::run(c, log), cli::exit_ok);
  const auto csv1 = slurp(d1 / "ladder_identities.csv");
  EXPECT_FALSE(csv1.empty());
  EXPECT_EQ(csv1, slurp(d2 / "ladder_identities.csv"));
  EXPECT_EQ(slurp(d1 / "report.json"), slurp(d2 / "report.json"));

  const auto report = json::parse(slurp(d1 / "report.json"));
  EXPECT_EQ(report["version"], version_string);
  EXPECT_EQ(report["config_hash"], cli::config_hash(c));
  EXPECT_EQ(report["status"], "ok");
  EXPECT_FALSE(report["config"].contains("output_dir"));
  EXPECT_NE(csv1.find("# config " + cli::config_hash(c)), std::string::npos);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Run, NumericalFailureMapsToExperimentExitCode) {
  const auto d = scratch_dir("fail");
  // A flat potential is covered by neither theorem; without force the run fails.
  auto c = cli::parse_config(json{{"experiment", "continuation"},
                                  {"N", 2},
                                  {"lambda_ladder", {1e-2}},
                                  {"potential", {{"a0", 1.0}, {"grad", {0.0, 0.0}}, {"a11", 0.0}, {"a22", 0.0}}}});
  c.output_dir = d.string();
  std::ostringstream log;
  EXPECT_EQ(cli::run(c, log), cli::exit_numerical + static_cast<int>(cli::Experiment::continuation));
  const auto report = json::parse(slurp(d / "report.json"));
  EXPECT_EQ(report["status"], "failed");
  EXPECT_FALSE(report["error"].get<std::string>().empty());
  fs::remove_all(d);
}

TEST(Binary, ExitCodes) {
  const auto d = scratch_dir("bin");
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("--config " + (d / "missing.json").string()), cli::exit_usage);
  {
    std::ofstream(d / "bad.json") << R"({"experiment": "continuation", "lambda_ladder": []})";
  }
  EXPECT_EQ(run_cli("--config " + (d / "bad.json").string()), cli::exit_usage);
  {
    std::ofstream(d / "ok.json") << R"({"experiment": "identities", "alphas": [1]})";
  }
  EXPECT_EQ(run_cli("--config " + (d / "ok.json").string() + " --out " + (d / "out").string()), cli::exit_ok);
  EXPECT_TRUE(fs::exists(d / "out" / "report.json"));
  EXPECT_EQ(run_cli("--config " + (d / "ok.json").string() + " --experiment continuation --out " +
                    (d / "out2").string()),
            cli::exit_usage);
  EXPECT_EQ(run_cli("--config " + (d / "ok.json").string() + " --tol-scale -1 --out " + (d / "out3").string()),
            cli::exit_usage);
  fs::remove_all(d);
}
