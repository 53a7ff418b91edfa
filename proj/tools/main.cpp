#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace guifix::cli;
  namespace fs = std::filesystem;

  CLI::App app{"guifix: detect and repair GUI accessibility issues"};
  app.require_subcommand(1);

  GlobalOptions g;
  std::string config, out;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--config", config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output file or directory (command specific)");
  app.add_option("--format", g.format, "Report format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, OutputFormat>{{"json", OutputFormat::Json}, {"table", OutputFormat::Table}}));

  std::string input, corpus, model, calibration, manifest;
  std::size_t n = 0;
  bool preset = false;
  bool inject = false;

  auto* detect = app.add_subcommand("detect", "Report accessibility issues in a layout dump");
  detect->add_option("input", input, "Layout dump (.json or .xml)")->required();

  auto* train = app.add_subcommand("train", "Train the link-prediction model on a clean corpus");
  train->add_option("corpus", corpus, "Corpus directory")->required();

  auto* calibrate = app.add_subcommand("calibrate", "Fit signal-to-attribute curves");
  calibrate->add_option("--model", model, "Trained model file");
  calibrate->add_option("--corpus", corpus, "Clean corpus directory");
  calibrate->add_flag("--preset", preset, "Write the published curve coefficients instead of fitting");

  auto* fix = app.add_subcommand("fix", "Repair one layout dump");
  fix->add_option("input", input, "Layout dump")->required();
  fix->add_option("--model", model, "Trained model file")->required();
  fix->add_option("--calibration", calibration, "Calibration file")->required();

  auto* eval = app.add_subcommand("eval", "Detect, fix and re-detect every GUI of a manifest");
  eval->add_option("manifest", manifest, "Corpus manifest")->required();
  eval->add_option("--model", model, "Trained model file")->required();
  eval->add_option("--calibration", calibration, "Calibration file")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("-n,--count", n, "Number of GUIs")->required();
  synth->add_flag("--inject", inject, "Inject issues and record them in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  if (!config.empty()) g.config = fs::path(config);
  if (!out.empty()) g.out = fs::path(out);

  const Streams io{std::cout, std::cerr};
  return guarded(std::cerr, [&]() -> int {
    if (detect->parsed()) return cmd_detect(g, input, io);
    if (train->parsed()) return cmd_train(g, corpus, io);
    if (calibrate->parsed()) {
      std::optional<fs::path> m, c;
      if (!model.empty()) m = fs::path(model);
      if (!corpus.empty()) c = fs::path(corpus);
      return cmd_calibrate(g, m, c, preset, io);
    }
    if (fix->parsed()) return cmd_fix(g, input, model, calibration, io);
    if (eval->parsed()) return cmd_eval(g, manifest, model, calibration, io);
    return cmd_synth(g, n, inject, io);
  });
}
