#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "smolu/error.hpp"
#include "smolu/parallel.hpp"

using namespace smolu::tools;

int main(int argc, char** argv) {
  CLI::App app{"Self-similar profiles of the coagulation equation for singular kernels"};
  app.require_subcommand(1);
  std::string config_path;
  unsigned threads = 0;
  int dump_every = -1;
  std::string out;

  const auto add = [&](const char* name, const char* help, bool config_required) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto* opt = sub->add_option("--config", config_path, "JSON run configuration");
    if (config_required) opt->required();
    sub->add_option("--threads", threads, "worker threads (default: hardware concurrency)");
    sub->add_option("--dump-every", dump_every, "dump the evolving profile every k subintervals")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    return sub;
  };
  CLI::App* solve = add("solve", "solve for one stationary profile", true);
  CLI::App* sweep = add("sweep", "run the epsilon sweep", true);
  CLI::App* dual = add("dual", "run a jump-process evolution with its Laplace oracle", true);
  CLI::App* verify = add("verify", "run the acceptance suite", false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    smolu::set_thread_count(threads);
    const RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    CommandOptions opt;
    if (!out.empty()) opt.out_dir = out;
    if (dump_every >= 0) opt.dump_every = dump_every;
    if (solve->parsed()) return cmd_solve(config, opt, std::cout);
    if (sweep->parsed()) return cmd_sweep(config, opt, std::cout);
    if (dual->parsed()) return cmd_dual(config, opt, std::cout);
    if (verify->parsed()) return cmd_verify(config, std::cout);
  } catch (const smolu::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const smolu::AdmissibilityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitConfig;
}
