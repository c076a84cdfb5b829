#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lze/energy.hpp"
#include "lze/flops.hpp"
#include "lze/sim.hpp"

namespace lze {

enum class Mode { Sim, LogDriven, Verify, Flops };

const char* to_string(Mode m) noexcept;

// Environment variable consulted for the default seed.
inline constexpr const char* kSeedEnvVar = "LZE_SEED";

struct RunConfig {
  double kappa = 0.4;
  double alpha = 0.3;
  double lambda = 0.9;
  std::uint32_t n_rollouts = 8;
  std::uint32_t t_prune = 2;
  double rho = 0.25;
  double gumbel_scale = 1.0;
  std::uint64_t epochs = 100;
  std::uint64_t seed = 0;
  Mode mode = Mode::Sim;

  sim::Strategy strategy = sim::Strategy::LZE;
  ScoreFactors factors;
  bool pruning = true;
  std::uint64_t steps_per_epoch = 1;
  std::uint64_t batch_size = 0;
  std::optional<double> stop_at_pass_rate;

  // Simulator environment; n_rollouts and seed above take precedence.
  sim::SimEnvConfig sim;
  CostModel cost;

  // flops subcommand
  std::uint64_t dataset_size = 7473;
  double flops_epochs = 7.0;

  // verify subcommand
  std::uint64_t verify_trials = 1'000'000;

  std::string input;
  std::string output;
  std::string metrics;
};

// Defaults with the seed taken from LZE_SEED when set. Throws ValidationError
// if the variable is not an unsigned integer.
RunConfig default_config();

// Parses `key = value` lines over `base`. Blank lines and `#` comments are
// skipped; later assignments win. ParseError names the line, ValidationError
// names the offending key and its bound.
RunConfig load_config(std::string_view text, RunConfig base);
RunConfig load_config(std::string_view text);

// Applies a single assignment (no validation).
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

void validate(const RunConfig& cfg);

sim::SimEnvConfig env_config(const RunConfig& cfg);
sim::LoopParams loop_params(const RunConfig& cfg);
PruneConfig prune_config(const RunConfig& cfg);

}  // namespace lze
