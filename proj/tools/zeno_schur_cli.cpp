// Batch front-end: zeno-schur --config run.json [--seed N] [--workers N]
//                              [--out PATH] [--format csv|json]

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "zeno_schur/cli.hpp"

int main(int argc, char** argv) {
  namespace zc = zeno_schur::cli;

  CLI::App app{"Zeno-Schur coarse graining of quadratic response tensors"};
  std::string config_path;
  std::string seed_text;
  unsigned workers = 0;
  std::string out;
  std::string format;
  app.add_option("--config", config_path, "JSON config (or a persisted manifest)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed_text, "Master seed, unsigned 64-bit decimal");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output path");
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.set_version_flag("--version", zeno_schur::kVersion);
  CLI11_PARSE(app, argc, argv);

  zc::Overrides ov;
  zc::ExperimentConfig cfg;
  try {
    if (!seed_text.empty()) ov.seed = zc::detail::parse_seed(nlohmann::json(seed_text));
    if (workers > 0) ov.workers = workers;
    if (!out.empty()) ov.out = out;
    if (!format.empty()) ov.format = format;

    std::ifstream in(config_path);
    if (!in) throw zeno_schur::IoFailure("cannot read " + config_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw zeno_schur::ConfigInvalid(std::string("config: ") + e.what());
    }
    cfg = zc::parse_config(doc, ov);
  } catch (const zeno_schur::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return 2;
  }
  return zc::run(cfg, std::cerr);
}
