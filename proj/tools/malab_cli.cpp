#include "malab/config.hpp"
#include "malab/parallel.hpp"
#include "malab/runner.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace malab;

namespace {

struct Flags
{
  std::string config;
  std::optional<std::string> out;
  std::optional<double> spacing;
  unsigned threads = 0;
  bool dump = false;
  std::string experiment; // positional of `stability`
};

const std::vector<std::string> kStability{"cofactor_stability", "sobolev_stability", "approximation", "convex_w21e",
                                          "contact_set",        "w2p_ratio",         "geometric_iteration"};

std::vector<std::string> default_suite()
{
  std::vector<std::string> all;
  for (const auto& n : experiment_names())
    if (n != "suite") all.push_back(n);
  return all;
}

bool is_stability(const std::string& name)
{
  return std::find(kStability.begin(), kStability.end(), name) != kStability.end();
}

// loads --config or builds the disc default; nullopt after reporting a problem
std::optional<ExperimentConfig> load(const Flags& f, const std::string& command)
{
  ExperimentConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) {
      std::cerr << "cannot read config " << f.config << '\n';
      return std::nullopt;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const auto parsed = parse_config(ss.str());
    if (!parsed.ok()) {
      std::cerr << f.config << ":\n" << format_errors(parsed.errors);
      return std::nullopt;
    }
    c = *parsed.config;
  } else {
    c.domain.kind = DomainKind::disc;
  }

  if (command == "stability") {
    if (!f.experiment.empty())
      c.experiment = f.experiment;
    else if (!is_stability(c.experiment))
      c.experiment = "cofactor_stability";
    if (!is_stability(c.experiment)) {
      std::cerr << "'" << c.experiment << "' is not a stability experiment\n";
      return std::nullopt;
    }
  } else {
    c.experiment = command;
  }
  if (c.experiment == "suite" && c.suite.empty()) c.suite = default_suite();
  if (f.spacing) {
    if (!(*f.spacing > 0.0)) {
      std::cerr << "--spacing must be positive\n";
      return std::nullopt;
    }
    c.spacing = *f.spacing;
  }
  return c;
}

void add_flags(CLI::App* sub, Flags& f)
{
  sub->add_option("-c,--config", f.config, "experiment config file")->check(CLI::ExistingFile);
  sub->add_option("-o,--out", f.out, "output directory (beats MA_LAB_OUT and the config)");
  sub->add_option("--spacing", f.spacing, "grid spacing override");
  sub->add_option("--threads", f.threads, "worker threads for parallel sweeps (0 = all cores)");
  sub->add_flag("--dump-config", f.dump, "print the effective config and exit");
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Monge-Ampere regularity lab"};
  app.require_subcommand(1);
  Flags flags;
  std::string command;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve-ma", "solve det D^2 phi = g and certify convexity"},
      {"solve-lma", "solve the linearized operator and check ABP"},
      {"sections", "section measures, volume scaling and engulfing"},
      {"cover", "Vitali cover and covering theorem"},
      {"maximal", "section maximal function and strong-type ratio"},
      {"goodsets", "good sets, distribution functions and decay"},
      {"barrier", "boundary supersolution checks"},
      {"stability", "stability and W^{2,p} sweeps"},
      {"suite", "run a list of experiments"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_flags(sub, flags);
    if (name == "stability")
      sub->add_option("experiment", flags.experiment, "stability experiment")->check(CLI::IsMember(kStability));
    sub->callback([&command, n = name] { command = n; });
  }
  CLI11_PARSE(app, argc, argv);

  std::string experiment = command;
  std::replace(experiment.begin(), experiment.end(), '-', '_');
  const auto config = load(flags, experiment);
  if (!config) return exit_config;
  if (flags.dump) {
    std::cout << emit_config(*config);
    return exit_pass;
  }
  set_thread_count(flags.threads);
  const auto out = resolve_output_dir(flags.out, *config);
  const auto result = run(*config, out, std::cout);
  std::cout << "output: " << out.string() << '\n';
  return result.exit_code;
}
