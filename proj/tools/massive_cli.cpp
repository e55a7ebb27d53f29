// massive_cli <command> [--config PATH] [--preset fast|paper] [--seed N]
//             [--out DIR] [--threads N]
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "massive/cli_runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Builds and checks the massive-attractor construction"};
  std::string command;
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  app.add_option("command", command, "construct|certify|simulate|density|lyapunov|srb|perturb|all")
      ->required()
      ->check(CLI::IsMember(massive::commands()));
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--preset", preset, "fast or paper")->check(CLI::IsMember({"fast", "paper"}));
  app.add_option("--seed", seed, "master RNG seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads, 0 = OpenMP default")
      ->check(CLI::Range(0, 1024));
  app.set_version_flag("--version", massive::kVersion);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    massive::RunConfig cfg = massive::parse_config(text);
    if (!preset.empty()) cfg.preset = massive::parse_preset(preset);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (threads) cfg.threads = *threads;
    return massive::run(command, cfg, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
