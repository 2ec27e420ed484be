#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "iidgan/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"IID-GAN on synthetic 2-D mixtures"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::string manifest;
  std::string qq_out;

  auto* train = app.add_subcommand("train", "Train every configured seed");
  train->add_option("--config", config, "experiment config (JSON)")->required();
  train->add_option("--out", out_dir, "output directory, overrides out_dir");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--manifest", manifest, "checkpoint manifest.json")->required();
  eval->add_option("--config", config, "experiment config (JSON)")->required();

  auto* iid = app.add_subcommand("iidtest", "Shapiro-Wilk, KS and QQ data for F(x)");
  iid->add_option("--manifest", manifest, "checkpoint manifest.json")->required();
  iid->add_option("--config", config, "experiment config (JSON)")->required();
  iid->add_option("--qq-out", qq_out, "directory for QQ CSVs")->required();

  auto* sweep = app.add_subcommand("sweep", "Train each configured variant on the same seeds");
  sweep->add_option("--config", config, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return iidgan::kExitConfig;
  }

  if (*train) {
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) out = out_dir;
    return iidgan::cmd_train(config, out, std::cerr);
  }
  if (*eval) return iidgan::cmd_eval(manifest, config, std::cout, std::cerr);
  if (*iid) return iidgan::cmd_iidtest(manifest, config, qq_out, std::cout, std::cerr);
  return iidgan::cmd_sweep(config, std::cout, std::cerr);
}
