#include <iostream>

#include <CLI11.hpp>

#include "liouville/cli.hpp"

int main(int argc, char** argv) {
  using namespace liouville;
  CLI::App app{"Blow-up solutions of the singular Liouville problem by Lyapunov-Schmidt reduction"};
  std::string config_path, experiment, out_dir;
  double tol_scale = 1.0;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--experiment", experiment, "override: identities | kernels | reduction_scan | continuation");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--tol-scale", tol_scale, "multiply every tolerance by this factor");
  app.set_version_flag("--version", version_string);
  CLI11_PARSE(app, argc, argv);

  try {
    auto config = cli::load_config(config_path);
    if (!experiment.empty()) {
      config.experiment = cli::experiment_from_string(experiment, "--experiment");
      if (config.experiment == cli::Experiment::continuation && config.lambda_ladder.empty())
        throw UsageError("lambda_ladder: must not be empty for a continuation run");
    }
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (tol_scale != 1.0) cli::scale_tolerances(config, tol_scale);
    return cli::run(config, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return cli::exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
