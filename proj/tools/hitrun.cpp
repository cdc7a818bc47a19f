// hitrun: command-line driver for the experiments.

#include "hitrun/errors.hpp"
#include "hitrun/experiments.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace {

struct Subcommand {
  std::string kind;
  CLI::App *app = nullptr;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option *>> options;
};

void add_option(Subcommand &sub, const std::string &name,
                const std::string &help) {
  // The config-file reader splits "diag:4,1" at the comma; joining restores
  // it, and a command-line value round-trips unchanged.
  CLI::Option *opt = sub.app->add_option("--" + name, sub.values[name], help)
                         ->delimiter(',')
                         ->multi_option_policy(CLI::MultiOptionPolicy::Join);
  sub.options.emplace_back(name, opt);
}

Subcommand &add_subcommand(CLI::App &parent, std::deque<Subcommand> &subs,
                           const std::string &name, const std::string &kind,
                           const std::string &help,
                           const std::vector<std::pair<std::string, std::string>>
                               &options) {
  Subcommand &sub = subs.emplace_back();
  sub.kind = kind;
  sub.app = parent.add_subcommand(name, help);
  sub.app->fallthrough();
  for (const auto &[opt, opt_help] : options)
    add_option(sub, opt, opt_help);
  return sub;
}

int report(int code, std::string_view error, const std::string &message) {
  nlohmann::json j = {{"error", error}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Gaussian hit-and-run, couplings, rates and Kaczmarz "
               "experiments"};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hitrun::version()));

  hitrun::ExperimentConfig config;
  app.add_option("--seed", config.seed, "master seed")
      ->capture_default_str();
  app.add_option("--workers", config.workers,
                 "OpenMP threads (0: default); results do not depend on it")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", config.out, "output file (default: stdout)");
  app.add_option("--format", config.format, "csv or json (default: from --out)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.set_config("--config", "", "INI file, one [section] per subcommand");

  // Options bind to map entries, so the entries must not move.
  std::deque<Subcommand> subs;
  add_subcommand(app, subs, "sample", "sample", "run one chain",
                 {{"cov", "diag:<list> or file:<csv>"},
                  {"tau", "direction law (default uniform)"},
                  {"x0", "comma list or 'target' (default)"},
                  {"steps", "number of steps (default 1000)"}});
  add_subcommand(app, subs, "couple", "couple",
                 "synchronous coupling ensemble",
                 {{"cov", "diag:<list> or file:<csv>"},
                  {"tau", "direction law (default uniform)"},
                  {"a0", "first start point"},
                  {"b0", "second start point"},
                  {"steps", "steps per replica (default 100)"},
                  {"replicas", "number of replicas (default 10000)"},
                  {"window", "fit window begin:end (default n/5:n+1)"}});
  Subcommand &rates = add_subcommand(
      app, subs, "rates", "rates", "contraction rates",
      {{"case", "bivariate|3d-low|3d-high|4d-low|two-scale|general"},
       {"kappa", "comma list of condition numbers"},
       {"d1", "two-scale: number of stiff coordinates"},
       {"d2", "two-scale: number of soft coordinates"},
       {"cov", "general: covariance"},
       {"tau", "general: direction law"},
       {"estimator", "default|exact|quadrature|radial|mc"},
       {"samples", "Monte Carlo sample count"}});
  add_subcommand(*rates.app, subs, "table1", "table1",
                 "rate sweep over the four scaling rows with slopes "
                 "(the rates options do not apply)",
                 {{"kappas", "comma list (default 100,1000,10000,100000)"}});
  rates.app->require_subcommand(0, 1);
  add_subcommand(app, subs, "overlap", "overlap",
                 "one-step TV overlap against its bound",
                 {{"cov", "diag:<list> or file:<csv>"},
                  {"x", "first start point"},
                  {"xt", "second start point"},
                  {"eps", "epsilon (default 0.1)"},
                  {"grid", "polar grid r:<n>,theta:<n>"}});
  add_subcommand(app, subs, "mix-bound", "mix-bound", "mixing-time bound",
                 {{"cov", "diag:<list> or file:<csv>"},
                  {"tau", "direction law when rho is computed"},
                  {"rho", "contraction rate (computed when absent)"},
                  {"eps", "target TV distance (default 0.01)"},
                  {"w2", "initial W2 distance (default 1)"},
                  {"c", "constant C (default 1)"},
                  {"cprime", "constant C' (default 1)"}});
  add_subcommand(app, subs, "kaczmarz", "kaczmarz",
                 "randomized Kaczmarz ensemble",
                 {{"matrix", "example:a=<a> or CSV file"},
                  {"b", "'zero' or CSV file"},
                  {"variant", "classical|free|tau:<spec>"},
                  {"x0", "start point (default x* - 10 e_1)"},
                  {"iters", "iterations (default ceil(6/rho))"},
                  {"replicas", "number of replicas (default 10000)"}});
  add_subcommand(app, subs, "kaczmarz-figure", "kaczmarz-figure",
                 "classical and coordinate-free curves",
                 {{"a", "matrix parameter (default 0.1)"},
                  {"replicas", "number of replicas (default 10000)"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // Nested subcommands come later in `subs`, so the last parsed one is the
  // innermost.
  const Subcommand *chosen = nullptr;
  for (const Subcommand &sub : subs)
    if (sub.app->parsed())
      chosen = &sub;
  config.kind = chosen->kind;
  for (const auto &[name, opt] : chosen->options)
    if (opt->count() > 0)
      config.params[name] = chosen->values.at(name);

  try {
    hitrun::output_format(config);
    const hitrun::ResultTable table = hitrun::run(config);
    hitrun::write_result(table, config);
  } catch (const hitrun::Error &e) {
    return report(hitrun::is_input_error(e.code()) ? 2 : 3,
                  hitrun::to_string(e.code()), e.what());
  } catch (const std::exception &e) {
    return report(3, "NumericalFailure", e.what());
  }
  return 0;
}
