#pragma once

#include <cstdint>
#include <variant>

namespace lze {

// Per-parameter-per-token cost coefficients. Inference is actor generation
// (2) plus reward scoring (2); optimization is forward (2) plus backward (4).
struct CostModel {
  double c_infer = 4.0;
  double c_optim = 6.0;
  double params = 1.0;
  double tokens_per_sample = 1.0;
};

void validate(const CostModel& model);

// (c_infer + c_optim) * E * D * n * P * T
double baseline_flops(const CostModel& model, double epochs, std::uint64_t dataset_size,
                      std::uint64_t n_rollout);

// Inference over the full pool, optimization over a kappa fraction:
// (c_infer + kappa * c_optim) * E * D * n * P * T
double lze_flops(const CostModel& model, double kappa, double epochs,
                 std::uint64_t dataset_size, std::uint64_t n_rollout);

// Per-token coefficient c_infer + kappa * c_optim.
double lze_coefficient(const CostModel& model, double kappa);

// 1 - (c_infer + kappa * c_optim) / (c_infer + c_optim)
double savings_ratio(const CostModel& model, double kappa);

enum class RolloutPhase { Train, Replay, Init };

struct RolloutGenerated {
  double tokens = 1.0;
  RolloutPhase phase = RolloutPhase::Train;
};

struct SampleOptimized {
  double tokens = 1.0;
};

using FlopsEvent = std::variant<RolloutGenerated, SampleOptimized>;

// Online accounting of a run. Replay rollouts count as inference and are
// also broken out in replay_flops. The initial scoring pass happens once,
// outside the epoch loop, and is kept in init_flops only (not in total).
struct FlopsLedger {
  double inference_flops = 0.0;
  double optimization_flops = 0.0;
  double replay_flops = 0.0;
  double init_flops = 0.0;
  std::uint64_t rollouts_generated = 0;
  std::uint64_t samples_optimized = 0;

  double total() const { return inference_flops + optimization_flops; }

  friend bool operator==(const FlopsLedger&, const FlopsLedger&) = default;
};

void ledger_record(FlopsLedger& ledger, const CostModel& model, const FlopsEvent& event);

struct BudgetReport {
  double inference_flops = 0.0;
  double optimization_flops = 0.0;
  double total = 0.0;
  double savings_vs_baseline = 0.0;
  double replay_flops = 0.0;
  double init_flops = 0.0;
};

// savings_vs_baseline = 1 - total / baseline, or 0 when baseline is 0.
BudgetReport budget_report(const FlopsLedger& ledger, double baseline);

}  // namespace lze
