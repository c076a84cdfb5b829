#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lze/config.hpp"

namespace lze {

// Runs the training loop on the toy environment and writes the metrics
// stream: an initial Step line (step 0), then Replay / Selection / Step /
// Prune lines as they happen, then one Budget line.
void run_sim(const RunConfig& cfg, std::ostream& metrics_out);

// Sidecar mode. Reads `step<TAB>prompt_id<TAB>r1,...,rn` records (step 0 is
// the initial scoring pass) and writes one selection trace line per later
// step. Pruning and replay are only advised, on `metrics_out` when given.
// Errors carry the 1-based input line number.
void run_log_driven(const RunConfig& cfg, std::istream& in, std::ostream& selections_out,
                    std::ostream* metrics_out = nullptr);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> verify_checks(const RunConfig& cfg);

// Prints one PASS/FAIL line per check; returns true iff all passed.
bool run_verify(const RunConfig& cfg, std::ostream& out);

// Prints the cost-model report for the configured kappa, epochs, dataset
// size and rollout count.
void run_flops(const RunConfig& cfg, std::ostream& out);

}  // namespace lze
