#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "gibbsdc/config.hpp"

namespace {

const char* kCommands[][2] = {
    {"sample", "Sample a Gibbs process on Q_n"},
    {"couple", "Paired disagreement couplings with a perturbed boundary"},
    {"percolation", "Connection probabilities of the dominating Boolean model"},
    {"functional", "Evaluate a score sum on a stored pattern"},
    {"clt", "Replicated functionals, variance scaling and normality checks"},
    {"decay", "Disagreement against connection probabilities over distance"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs point process simulation by Poisson embedding and disagreement coupling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("gibbsdc ") + GIBBSDC_VERSION);

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::string> config_files;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    subs[name] = sub;
    sub->add_option("--config", config_files[name], "key = value file; flags override it");
    for (const auto& key : gibbsdc::allowed_keys(name))
      sub->add_option("--" + key, values[name][key]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gibbsdc::exit_validation;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      gibbsdc::Settings file;
      if (!config_files[name].empty()) {
        std::ifstream f(config_files[name]);
        if (!f) throw gibbsdc::ConfigError("config: cannot open " + config_files[name]);
        file = gibbsdc::read_settings(f);
      }
      gibbsdc::Settings flags;
      for (const auto& [key, value] : values[name])
        if (sub->count("--" + key) > 0) flags[key] = value;
      const auto config = gibbsdc::make_config(name, gibbsdc::merge_settings(file, flags));
      return gibbsdc::run(config, std::cout);
    } catch (const gibbsdc::BudgetExceeded& e) {
      std::cerr << "budget exceeded: " << e.what() << '\n';
      return gibbsdc::exit_budget;
    } catch (const std::invalid_argument& e) {
      std::cerr << "invalid configuration: " << e.what() << '\n';
      return gibbsdc::exit_validation;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return gibbsdc::exit_failure;
    }
  }
  return gibbsdc::exit_failure;
}
