#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lze/flops.hpp"
#include "lze/pool.hpp"
#include "lze/select.hpp"

namespace lze::metrics {

// Metrics stream: `Kind<TAB>key=value<TAB>...`, fixed field order per kind,
// reals at 17 significant digits, id lists comma-separated ("" when empty).

struct StepLine {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  std::uint64_t active = 0;
  std::uint64_t pruned = 0;
  std::uint64_t rolled_out = 0;
  std::uint64_t selected = 0;
  std::uint64_t gradient_samples = 0;
  double mean_pass_rate = 0.0;
  double mean_sampled_pass_rate = 0.0;
  double inference_flops = 0.0;
  double optimization_flops = 0.0;
  friend bool operator==(const StepLine&, const StepLine&) = default;
};

struct SelectionLine {
  std::uint64_t step = 0;
  std::uint64_t k = 0;
  std::vector<PromptId> ids;
  std::vector<double> energies;
  std::vector<double> perturbed;
  friend bool operator==(const SelectionLine&, const SelectionLine&) = default;
};

struct PruneLine {
  std::uint64_t epoch = 0;
  std::vector<PromptId> ids;
  bool advisory = false;
  friend bool operator==(const PruneLine&, const PruneLine&) = default;
};

struct ReplayLine {
  std::uint64_t epoch = 0;
  std::vector<PromptId> sampled;
  std::vector<PromptId> restored;
  bool advisory = false;
  friend bool operator==(const ReplayLine&, const ReplayLine&) = default;
};

struct BudgetLine {
  BudgetReport report;
  friend bool operator==(const BudgetLine& a, const BudgetLine& b) {
    const BudgetReport& x = a.report;
    const BudgetReport& y = b.report;
    return x.inference_flops == y.inference_flops &&
           x.optimization_flops == y.optimization_flops && x.total == y.total &&
           x.savings_vs_baseline == y.savings_vs_baseline && x.replay_flops == y.replay_flops &&
           x.init_flops == y.init_flops;
  }
};

using MetricsLine = std::variant<StepLine, SelectionLine, PruneLine, ReplayLine, BudgetLine>;

std::string format(const MetricsLine& line);
// Throws ParseError on anything that is not a well-formed metrics line.
MetricsLine parse(std::string_view line);

// Selected ids (ascending) with their raw energies.
SelectionLine selection_line(const SelectionDecision& decision);

// Log-driven trace: `step<TAB>id1,id2,...<TAB>e1,e2,...`.
struct TraceLine {
  std::uint64_t step = 0;
  std::vector<PromptId> ids;
  std::vector<double> energies;
  friend bool operator==(const TraceLine&, const TraceLine&) = default;
};

std::string format(const TraceLine& line);
TraceLine parse_trace(std::string_view line);
TraceLine trace_line(const SelectionDecision& decision);

}  // namespace lze::metrics
