#include <doctest.h>

#include <vector>

#include "lze/error.hpp"
#include "lze/flops.hpp"
#include "lze/sim.hpp"

using namespace lze;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected lze::Error");
  return ErrorCode::IoError;
}

// Replays one step's worth of events: every prompt rolled out n times,
// `selected` of them optimized n times.
void step_events(FlopsLedger& l, const CostModel& m, int prompts, int selected, int n) {
  for (int i = 0; i < prompts * n; ++i) ledger_record(l, m, RolloutGenerated{});
  for (int i = 0; i < selected * n; ++i) ledger_record(l, m, SampleOptimized{});
}

}  // namespace

TEST_CASE("baseline_flops examples") {
  const CostModel unit;
  CHECK(baseline_flops(unit, 1, 1, 1) == 10.0);
  const CostModel big{4.0, 6.0, 1.5e9, 1000.0};
  CHECK(baseline_flops(big, 7, 7473, 8) ==
        doctest::Approx(10.0 * 7 * 7473 * 8 * 1.5e9 * 1000).epsilon(1e-15));
  CHECK(baseline_flops(big, 7, 7473, 16) == 2.0 * baseline_flops(big, 7, 7473, 8));
  CHECK(code_of([] { baseline_flops(CostModel{}, 0, 1, 1); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { baseline_flops(CostModel{4, 6, -1, 1}, 1, 1, 1); }) ==
        ErrorCode::InvalidParams);
}

TEST_CASE("lze_flops and coefficient examples") {
  const CostModel m;
  CHECK(lze_flops(m, 1.0, 3, 11, 8) == baseline_flops(m, 3, 11, 8));
  CHECK(lze_coefficient(m, 0.4) == 6.4);
  CHECK(lze_coefficient(m, 0.5) == 7.0);
  CHECK(code_of([] { lze_flops(CostModel{}, 0.0, 1, 1, 1); }) == ErrorCode::InvalidRatio);
  CHECK(code_of([] { lze_flops(CostModel{}, 1.5, 1, 1, 1); }) == ErrorCode::InvalidRatio);

  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double f = lze_flops(m, i / 100.0, 7, 7473, 8);
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("savings_ratio examples") {
  const CostModel m;
  CHECK(savings_ratio(m, 0.4) == 0.36);
  CHECK(savings_ratio(m, 1.0) == 0.0);
  // The kappa -> 0 limit is outside the domain; the closed form gives 6/10.
  CHECK(1.0 - m.c_infer / (m.c_infer + m.c_optim) == 0.6);
  CHECK(code_of([] { savings_ratio(CostModel{}, 0.0); }) == ErrorCode::InvalidRatio);
}

TEST_CASE("ledger_record examples") {
  const CostModel m;
  FlopsLedger empty;
  CHECK(empty.inference_flops == 0.0);
  CHECK(empty.optimization_flops == 0.0);
  CHECK(empty.total() == 0.0);

  FlopsLedger one;
  ledger_record(one, m, RolloutGenerated{37.0});
  CHECK(one.inference_flops == 4.0 * 37.0);
  CHECK(one.rollouts_generated == 1);
  ledger_record(one, m, SampleOptimized{37.0});
  CHECK(one.optimization_flops == 6.0 * 37.0);
  CHECK(one.samples_optimized == 1);

  FlopsLedger phases;
  ledger_record(phases, m, RolloutGenerated{1.0, RolloutPhase::Replay});
  ledger_record(phases, m, RolloutGenerated{1.0, RolloutPhase::Init});
  CHECK(phases.inference_flops == 4.0);
  CHECK(phases.replay_flops == 4.0);
  CHECK(phases.init_flops == 4.0);
  CHECK(phases.total() == 4.0);

  CHECK(code_of([&] { ledger_record(one, m, RolloutGenerated{0.0}); }) ==
        ErrorCode::InvalidTokenCount);
}

TEST_CASE("full-data over selected ledger on identical event streams is 10/6.4") {
  const CostModel m;
  FlopsLedger full, lze;
  for (int step = 0; step < 9; ++step) {
    step_events(full, m, 5, 5, 8);
    step_events(lze, m, 5, 2, 8);
  }
  CHECK(full.total() / lze.total() == 1.5625);
  CHECK(full.total() / lze.total() == 10.0 / 6.4);
}

TEST_CASE("simulated runs: ledger ratio and ledger-formula agreement") {
  sim::SimEnvConfig env;
  env.num_prompts = 40;
  sim::LoopParams p;
  p.pruning = false;
  p.epochs = 6;
  p.strategy = sim::Strategy::FullData;
  const auto full = sim::run_learning_experiment(env, p);
  p.strategy = sim::Strategy::LZE;
  const auto lze = sim::run_learning_experiment(env, p);

  CHECK(full.ledger.total() / lze.ledger.total() == 1.5625);
  CHECK(lze.ledger.total() == lze_flops(p.cost, 0.4, 6, 40, 8));
  CHECK(full.ledger.total() == baseline_flops(p.cost, 6, 40, 8));
  CHECK(lze.ledger.replay_flops == 0.0);
  CHECK(lze.ledger.init_flops == 4.0 * 40 * 8);
}

TEST_CASE("pruning strictly reduces inference flops") {
  sim::SimEnvConfig env;
  env.num_prompts = 32;
  env.correct_logit_min = 4.0;
  env.correct_logit_max = 8.0;

  struct PruneSeen : sim::ExperimentObserver {
    std::uint64_t first = 0;
    bool any = false;
    void on_prune(std::uint64_t epoch, const std::vector<PromptId>& ids) override {
      if (!ids.empty() && !any) {
        any = true;
        first = epoch;
      }
    }
  } seen;

  sim::LoopParams p;
  p.epochs = 8;
  p.pruning = true;
  const auto pruned = sim::run_learning_experiment(env, p, &seen);
  p.pruning = false;
  const auto full = sim::run_learning_experiment(env, p);
  REQUIRE(seen.any);
  REQUIRE(seen.first < p.epochs);
  CHECK(pruned.ledger.inference_flops < full.ledger.inference_flops);
}

TEST_CASE("budget_report") {
  FlopsLedger l;
  l.inference_flops = 4.0;
  l.optimization_flops = 2.4;
  l.replay_flops = 1.0;
  l.init_flops = 0.5;
  const auto r = budget_report(l, 10.0);
  CHECK(r.total == 6.4);
  CHECK(r.savings_vs_baseline == doctest::Approx(0.36));
  CHECK(r.replay_flops == 1.0);
  CHECK(r.init_flops == 0.5);
  CHECK(budget_report(FlopsLedger{}, 0.0).savings_vs_baseline == 0.0);
}
