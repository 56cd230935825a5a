#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cssgld/errors.hpp"
#include "cssgld/harness/config.hpp"
#include "cssgld/harness/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-sensing recovery with a generative prior via Langevin dynamics"};
  std::string kind;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool replot_only = false;
  app.add_option("kind", kind, "recover | compare | phase_transition | validate | chain_lab")->required();
  app.add_option("--config,-c", config_path, "experiment JSON")->required();
  app.add_option("--out,-o", out_dir, "output directory (overrides the config's \"out\")");
  app.add_option("--set", overrides, "override a config field, e.g. --set sampler.beta=100");
  app.add_flag("--replot", replot_only, "regenerate plots from existing outputs without running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  namespace h = cssgld::harness;
  try {
    if (!out_dir.empty()) overrides.push_back("out=" + nlohmann::json(out_dir).dump());
    const h::ExperimentConfig config = h::load_config(config_path, overrides, h::parse_kind(kind));
    if (replot_only) {
      h::replot(config.kind, config.out);
    } else {
      h::run_experiment(config);
    }
    std::cout << "wrote " << config.out.string() << "\n";
    return 0;
  } catch (const cssgld::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cssgld::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cssgld::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cssgld::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cssgld::UnsupportedDimension& e) {
    std::cerr << "unsupported dimension: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
