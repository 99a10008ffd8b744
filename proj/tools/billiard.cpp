#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "billiard/harness.hpp"

using namespace billiard;
using namespace billiard::harness;

namespace {

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
};

int run_command(const std::string& command, const RunOptions& opt) {
  RunConfig cfg = load_config(opt.config);
  if (cfg.command != command) {
    throw ConfigError(cfg.source, 1, "config holds a '" + cfg.command + "' block but the command is '" + command + "'");
  }
  if (opt.seed) cfg.master_seed = *opt.seed;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.out) cfg.output_dir = *opt.out;
  return run(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Hard-ball billiard flow: simulation, neutral spaces, singularity probes and geometry checks"};
  app.require_subcommand(1);

  RunOptions opt;
  std::string chosen;
  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' block of a config");
    sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override master_seed");
    sub->add_option("--workers", opt.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "output directory");
    sub->callback([&chosen, name] { chosen = name; });
  }

  std::string run_dir;
  std::string format = "csv";
  CLI::App* exp = app.add_subcommand("export", "re-emit the tables of a finished run");
  exp->add_option("--run", run_dir, "run directory")->required();
  exp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  exp->callback([&chosen] { chosen = "export"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (chosen == "export") {
      for (const auto& p : export_run(run_dir, format == "json" ? ExportFormat::json : ExportFormat::csv)) {
        std::cout << p.string() << "\n";
      }
      return kOk;
    }
    return run_command(chosen, opt);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  } catch (const CorruptRun& e) {
    std::cerr << "corrupt run: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
