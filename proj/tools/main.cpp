#include "app.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace fastmix;

int main(int argc, char** argv) {
  CLI::App cli{"fastmix: maximum likelihood for fast-mixing Ising models"};
  cli.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::string suite = "all";
  std::string trace_path;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "configuration file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    else opt->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out, "output directory");
  };

  auto* plan = cli.add_subcommand("plan", "print the schedule (K, M, v) and work bounds");
  common(plan, true);
  plan->add_option("--mode", mode, "convex or strongly-convex")
      ->check(CLI::IsMember({"convex", "strongly-convex"}));
  auto* train = cli.add_subcommand("train", "run projected gradient descent and write the trace");
  common(train, true);
  train->add_option("--mode", mode, "convex or strongly-convex")
      ->check(CLI::IsMember({"convex", "strongly-convex"}));
  auto* verify = cli.add_subcommand("verify", "run the bound verification suite");
  common(verify, false);
  std::vector<std::string> suites{"all"};
  for (const auto& n : suite_names()) suites.push_back(n);
  verify->add_option("--suite", suite, "which checks to run")->check(CLI::IsMember(suites));
  auto* reproduce = cli.add_subcommand("reproduce", "rerun the 4x4 worked example");
  common(reproduce, false);
  auto* exporter = cli.add_subcommand("export", "convert a JSON trace to CSV");
  exporter->add_option("--trace", trace_path, "trace.json written by train")
      ->required()
      ->check(CLI::ExistingFile);
  exporter->add_option("--out", out, "output directory");

  CLI11_PARSE(cli, argc, argv);

  try {
    const bool have_config = !config_path.empty();
    app::RunConfig cfg = have_config ? app::load_config(config_path) : app::worked_example_config();
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (mode) cfg.mode = parse_mode(*mode);

    if (*plan) return app::cmd_plan(cfg, std::cout);
    if (*train) return app::cmd_train(cfg, std::cout);
    if (*verify) return app::cmd_verify(cfg, suite, std::cout);
    if (*reproduce) return app::cmd_reproduce(cfg, std::cout);
    if (*exporter) return app::cmd_export(trace_path, out.value_or("."), std::cout);
  } catch (const NoCertificateError& e) {
    std::cerr << "error: " << e.what()
              << "\nthe Gibbs certificate needs max_degree * tanh(beta) < 1 (or ||R|| < 1 for the "
                 "spectral set); shrink the constraint\n";
    return 3;
  } catch (const ModeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
