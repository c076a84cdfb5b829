#include "lze/flops.hpp"

#include <cmath>
#include <type_traits>

#include "lze/error.hpp"

namespace lze {

namespace {

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw Error(ErrorCode::InvalidRatio, "selection ratio kappa must lie in (0,1]");
}

double volume(const CostModel& model, double epochs, std::uint64_t dataset_size,
              std::uint64_t n_rollout) {
  validate(model);
  if (!positive(epochs) || dataset_size == 0 || n_rollout == 0)
    throw Error(ErrorCode::InvalidParams, "epochs, dataset size and n must be positive");
  return epochs * static_cast<double>(dataset_size) * static_cast<double>(n_rollout) *
         model.params * model.tokens_per_sample;
}

}  // namespace

void validate(const CostModel& model) {
  if (!positive(model.c_infer) || !positive(model.c_optim) || !positive(model.params) ||
      !positive(model.tokens_per_sample))
    throw Error(ErrorCode::InvalidParams, "cost model parameters must be positive");
}

double baseline_flops(const CostModel& model, double epochs, std::uint64_t dataset_size,
                      std::uint64_t n_rollout) {
  return (model.c_infer + model.c_optim) * volume(model, epochs, dataset_size, n_rollout);
}

double lze_coefficient(const CostModel& model, double kappa) {
  validate(model);
  check_kappa(kappa);
  return model.c_infer + kappa * model.c_optim;
}

double lze_flops(const CostModel& model, double kappa, double epochs,
                 std::uint64_t dataset_size, std::uint64_t n_rollout) {
  return lze_coefficient(model, kappa) * volume(model, epochs, dataset_size, n_rollout);
}

double savings_ratio(const CostModel& model, double kappa) {
  return 1.0 - lze_coefficient(model, kappa) / (model.c_infer + model.c_optim);
}

void ledger_record(FlopsLedger& ledger, const CostModel& model, const FlopsEvent& event) {
  validate(model);
  std::visit(
      [&](const auto& e) {
        if (!positive(e.tokens))
          throw Error(ErrorCode::InvalidTokenCount, "token count must be positive");
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, RolloutGenerated>) {
          const double cost = model.c_infer * model.params * e.tokens;
          if (e.phase == RolloutPhase::Init) {
            ledger.init_flops += cost;
            return;
          }
          ledger.inference_flops += cost;
          if (e.phase == RolloutPhase::Replay) ledger.replay_flops += cost;
          ++ledger.rollouts_generated;
        } else {
          ledger.optimization_flops += model.c_optim * model.params * e.tokens;
          ++ledger.samples_optimized;
        }
      },
      event);
}

BudgetReport budget_report(const FlopsLedger& ledger, double baseline) {
  BudgetReport r;
  r.inference_flops = ledger.inference_flops;
  r.optimization_flops = ledger.optimization_flops;
  r.total = ledger.total();
  r.savings_vs_baseline = baseline > 0.0 ? 1.0 - r.total / baseline : 0.0;
  r.replay_flops = ledger.replay_flops;
  r.init_flops = ledger.init_flops;
  return r;
}

}  // namespace lze
