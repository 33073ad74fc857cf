// Command line driver: one subcommand per pipeline stage. Flags override the
// config file, which overrides SCENGEN_* environment variables and the
// built-in defaults.

#include "scengen/config.hpp"
#include "scengen/pipeline.hpp"

#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

const char kUsage[] = R"(usage: scengen COMMAND [options]

commands:
  ingest        parse a raw track CSV into the canonical dataset artifact
  train         fit the configured model on the learning split
  generate      sample scenarios for every day of a split
  eval-quality  score scenario files with the quality metric suite
  eval-value    run the bidding campaign over the test days
  report        aggregate summaries and figure data from prior evaluations

options:
  --config PATH  configuration file (default: built-in defaults)
  --track NAME   override run.track  (wind|pv|load)
  --model NAME   override run.model  (nf|vae|gan|rand)
  --seed N       override run.seed
  --out DIR      override run.out
  --solver NAME  override run.solver (relaxed|exact)
  --set K=V      override any config field (section.key=value), repeatable
  --defaults     print every config field with its default and exit
  --help         print this message and exit
)";

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
      std::cout << kUsage;
      return args.empty() ? 1 : 0;
    }
    if (args[0] == "--defaults") {
      for (const auto& [key, value] : scengen::config::schema_defaults()) {
        std::cout << key << " = " << value << "\n";
      }
      return 0;
    }
    const std::string command = args[0];
    if (!command.empty() && command[0] == '-') {
      throw std::invalid_argument("expected a command before options; see --help");
    }

    std::string cfg_path;
    scengen::config::Overrides overrides;
    for (size_t i = 1; i < args.size(); ++i) {
      const std::string& a = args[i];
      auto need = [&](const char* flag) -> const std::string& {
        if (i + 1 >= args.size()) {
          throw std::invalid_argument(std::string(flag) + " needs a value");
        }
        return args[++i];
      };
      if (a == "--config") {
        cfg_path = need("--config");
      } else if (a == "--track") {
        overrides.emplace_back("run.track", need("--track"));
      } else if (a == "--model") {
        overrides.emplace_back("run.model", need("--model"));
      } else if (a == "--seed") {
        overrides.emplace_back("run.seed", need("--seed"));
      } else if (a == "--out") {
        overrides.emplace_back("run.out", need("--out"));
      } else if (a == "--solver") {
        overrides.emplace_back("run.solver", need("--solver"));
      } else if (a == "--set") {
        const std::string kv = need("--set");
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) {
          throw std::invalid_argument("--set expects section.key=value, got '" + kv + "'");
        }
        overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
      } else {
        throw std::invalid_argument("unknown option '" + a + "'; see --help");
      }
    }

    const scengen::config::Config cfg = scengen::config::load(cfg_path, overrides);
    scengen::pipeline::run_command(command, cfg);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "scengen: " << e.what() << "\n";
    return 1;
  }
}
