#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbsdc/functionals.hpp"
#include "gibbsdc/harness.hpp"
#include "gibbsdc/models.hpp"
#include "gibbsdc/sampler.hpp"

namespace gibbsdc {

/// Invalid configuration.  The message starts with the offending key.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

using Settings = std::map<std::string, std::string>;

/// key = value lines; blank lines and lines starting with '#' are skipped.
Settings read_settings(std::istream& is);
/// Values of `over` replace those of `base`.
Settings merge_settings(Settings base, const Settings& over);

/// Keys accepted by a subcommand.
const std::vector<std::string>& allowed_keys(const std::string& command);

struct RunConfig {
  std::string command;
  /// Effective settings, defaults filled in; echoed into output headers.
  Settings settings;

  InteractionModel model;
  double window = 10.0;
  std::uint64_t seed = 1;
  RouteSpec route{};
  RetentionMode retention{};
  std::string boundary = "none";
  std::string out;
  std::string report;
  CouplingAlgo algo = CouplingAlgo::radial;
  Box perturb_box{};
  std::size_t reps = 1;
  std::vector<double> distances;
  double margin = -1.0;
  ScoreSpec spec{};
  std::string in;
  bool has_window = false;
  ScoreVariant variant = ScoreVariant::full;
  std::vector<double> n_list;
  SamplerBudget budget{};
  double n_max = 0.0;
  unsigned threads = 0;
};

/// Validates every key before anything runs.  Unknown keys, malformed values and constraint
/// violations raise ConfigError.
RunConfig make_config(const std::string& command, const Settings& settings);

/// Comment header of every output file: tool version, effective configuration, master seed.
std::string output_header(const RunConfig& c);

/// Exit codes of run().
enum ExitCode { exit_ok = 0, exit_failure = 1, exit_validation = 2, exit_budget = 3 };

/// Executes the subcommand, writing artifacts and a short summary to `log`.
int run(const RunConfig& c, std::ostream& log);

}  // namespace gibbsdc
