// gdmc: gradient descent for symmetric matrix completion from small random
// initialization. Each subcommand writes plot-ready CSV and JSON files.

#include "gdmc/experiments.hpp"
#include "gdmc/validate.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out;
  std::optional<long long> trials;
  std::optional<long long> jobs;
  std::optional<long long> record_every;
  bool paper_scale = false;
};

void add_common(CLI::App *sub, Common &c) {
  sub->add_option("--config", c.config, "key = value config file");
  sub->add_option("--set", c.sets, "override one key, e.g. --set p=0.2");
  sub->add_option("--seed", c.seed, "base seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--trials", c.trials, "trials per sweep cell");
  sub->add_option("--jobs", c.jobs, "worker threads");
  sub->add_option("--record-every", c.record_every, "snapshot stride");
}

std::vector<std::string> overrides(const std::string &command, const Common &c) {
  std::vector<std::string> out;
  if (c.paper_scale) {
    if (command == "fig2")
      out.push_back("n=5000");
    if (command == "fig3")
      out.push_back("trials=1000");
  }
  for (const auto &s : c.sets)
    out.push_back(s);
  if (c.seed)
    out.push_back("seed=" + std::to_string(*c.seed));
  if (c.out)
    out.push_back("out=" + *c.out);
  if (c.trials)
    out.push_back("trials=" + std::to_string(*c.trials));
  if (c.jobs)
    out.push_back("jobs=" + std::to_string(*c.jobs));
  if (c.record_every)
    out.push_back("record_every=" + std::to_string(*c.record_every));
  return out;
}

int run_command(const std::string &command, const Common &c) {
  const std::optional<std::string> file =
      c.config.empty() ? std::nullopt : std::optional<std::string>(c.config);
  const gdmc::ExperimentConfig cfg =
      gdmc::build_config(command, file, overrides(command, c));
  gdmc::CommandOutput out;
  if (command == "fig1")
    out = gdmc::cmd_fig1(cfg);
  else if (command == "fig2")
    out = gdmc::cmd_fig2(cfg);
  else if (command == "fig3")
    out = gdmc::cmd_fig3(cfg);
  else if (command == "fig4")
    out = gdmc::cmd_fig4(cfg);
  else
    out = gdmc::cmd_run(cfg);
  for (const auto &w : out.warnings)
    std::cerr << "warning: " << w << "\n";
  for (const auto &f : out.files)
    std::cout << f.string() << "\n";
  return 0;
}

int run_validate(const gdmc::ValidateOptions &options,
                 const std::optional<std::string> &json_path) {
  const auto checks = gdmc::run_checks(options);
  bool ok = true;
  for (const auto &c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.id
              << " metric=" << gdmc::io::format_double(c.metric)
              << " threshold=" << gdmc::io::format_double(c.threshold) << "  "
              << c.detail << "\n";
    ok = ok && c.passed;
  }
  if (json_path)
    gdmc::io::write_json(*json_path, gdmc::to_json(checks));
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Gradient descent for matrix completion from small random "
               "initialization"};
  app.require_subcommand(1);

  std::map<std::string, Common> common;
  for (const char *name : {"fig1", "fig2", "fig3", "fig4", "run"}) {
    CLI::App *sub = app.add_subcommand(name, std::string("run the ") + name +
                                                 " experiment");
    add_common(sub, common[name]);
    if (std::string(name) == "fig2" || std::string(name) == "fig3")
      sub->add_flag("--paper-scale", common[name].paper_scale,
                    "n = 5000 (fig2) or 1000 trials (fig3)");
  }

  gdmc::ValidateOptions vopts;
  std::optional<std::string> json_path;
  CLI::App *validate = app.add_subcommand("validate", "run the invariant suite");
  validate->add_option("--n", vopts.n, "problem size");
  validate->add_option("--seeds", vopts.seeds, "random instances per check");
  validate->add_option("--seed", vopts.seed, "base seed");
  validate->add_option("--json", json_path, "write the report as JSON");
  validate->add_option("--inject-fault", vopts.inject_fault,
                       "corrupt one check's input (mask_symmetry)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed())
      return run_validate(vopts, json_path);
    for (auto &[name, c] : common)
      if (app.get_subcommand(name)->parsed())
        return run_command(name, c);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
