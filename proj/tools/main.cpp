#include <chrono>
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "spinres/report.hpp"
#include "spinres/types.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string format;
  std::int64_t seed = 0;
  int threads = 1;
  bool seed_given = false;
  bool threads_given = false;
  bool format_given = false;
  bool out_given = false;
  bool timings = false;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "JSON config file");
  sub->add_option("--out", flags.out, "output path (stdout when omitted)")
      ->each([&](const std::string&) { flags.out_given = true; });
  sub->add_option("--format", flags.format, "json or csv")
      ->each([&](const std::string&) { flags.format_given = true; });
  sub->add_option("--seed", flags.seed, "random seed")
      ->each([&](const std::string&) { flags.seed_given = true; });
  sub->add_option("--threads", flags.threads, "worker threads (modules run sequentially)")
      ->each([&](const std::string&) { flags.threads_given = true; });
  sub->add_flag("--timings", flags.timings, "include wall-clock timings in the report");
}

int run(const std::string& command, const CommonFlags& flags) {
  spinres::FlagOverrides overrides;
  overrides.has_seed = flags.seed_given;
  overrides.seed = flags.seed;
  overrides.has_threads = flags.threads_given;
  overrides.threads = flags.threads;
  overrides.has_format = flags.format_given;
  overrides.format = flags.format;
  overrides.has_out = flags.out_given;
  overrides.out = flags.out;
  overrides.has_timings = flags.timings;
  overrides.timings = flags.timings;

  spinres::RunConfig config =
      flags.config_path.empty()
          ? spinres::parse_config_text("{}", command, overrides)
          : spinres::parse_config_file(flags.config_path, command, overrides);

  auto start = std::chrono::steady_clock::now();
  spinres::RunReport report = spinres::run_command(config);
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - start)
                  .count();

  std::string text;
  if (config.format == "json") {
    std::vector<std::pair<std::string, double>> timings{{"run", ms}};
    text = spinres::render_json_report(config, report, timings, config.timings);
  } else {
    text = spinres::render_csv_report(report);
  }
  spinres::write_text(config.out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical restrictions of quantum spin chains: potentials, "
               "locality probes, cluster expansions, and exact Ising statistics"};
  app.require_subcommand(1);

  const std::vector<std::string> commands = {
      "restrict",  "potential", "betamax", "ising-ldp",
      "locality",  "dyson-check", "fcs"};
  const std::vector<std::string> descriptions = {
      "measure an observable sitewise on a Gibbs or ground state",
      "dump the interaction potential of a classical restriction",
      "largest inverse temperature passing the summable-weight condition",
      "Toeplitz determinants, Szego free energy, and the rate function",
      "conditional-probability probe of ground-state non-quasi-locality",
      "truncated imaginary-time expansion, diagram factorization, convergence certificate",
      "finitely correlated state restrictions and conditioned correlations"};

  std::vector<CommonFlags> flags(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], descriptions[i]);
    add_common(sub, flags[i]);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (app.got_subcommand(commands[i])) {
        return run(commands[i], flags[i]);
      }
    }
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const spinres::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
