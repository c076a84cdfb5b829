#include <ostream>

#include "lze/metrics.hpp"
#include "lze/runner.hpp"

namespace lze {

namespace {

class MetricsWriter : public sim::ExperimentObserver {
 public:
  explicit MetricsWriter(std::ostream& out) : out_(out) {}

  void on_init(const PromptPool& pool, double mean) override {
    metrics::StepLine s;
    s.active = pool.active().size();
    s.rolled_out = pool.size();
    s.mean_pass_rate = mean;
    double sampled = 0.0;
    for (const auto& [id, r] : pool.records()) sampled += r.ema;
    s.mean_sampled_pass_rate = sampled / static_cast<double>(pool.size());
    emit(s);
  }

  void on_replay(std::uint64_t epoch, const std::vector<PromptId>& sampled,
                 const std::vector<PromptId>& restored) override {
    if (sampled.empty()) return;
    emit(metrics::ReplayLine{epoch, sampled, restored, false});
  }

  void on_selection(const SelectionDecision& d) override { emit(metrics::selection_line(d)); }

  void on_step(const sim::StepReport& r, const FlopsLedger& ledger) override {
    metrics::StepLine s;
    s.step = r.step;
    s.epoch = r.epoch;
    s.active = r.active;
    s.pruned = r.pruned;
    s.rolled_out = r.rolled_out;
    s.selected = r.selected;
    s.gradient_samples = r.gradient_samples;
    s.mean_pass_rate = r.mean_pass_rate;
    s.mean_sampled_pass_rate = r.mean_sampled_pass_rate;
    s.inference_flops = ledger.inference_flops;
    s.optimization_flops = ledger.optimization_flops;
    emit(s);
  }

  void on_prune(std::uint64_t epoch, const std::vector<PromptId>& pruned) override {
    if (pruned.empty()) return;
    emit(metrics::PruneLine{epoch, pruned, false});
  }

 private:
  void emit(const metrics::MetricsLine& line) { out_ << metrics::format(line) << '\n'; }

  std::ostream& out_;
};

}  // namespace

void run_sim(const RunConfig& cfg, std::ostream& metrics_out) {
  validate(cfg);
  const sim::SimEnvConfig env = env_config(cfg);
  const sim::LoopParams params = loop_params(cfg);
  MetricsWriter writer(metrics_out);
  const sim::ExperimentResult result = sim::run_learning_experiment(env, params, &writer);

  double baseline = 0.0;
  if (result.data_passes > 0.0)
    baseline = baseline_flops(cfg.cost, result.data_passes, env.num_prompts, env.n_rollouts);
  metrics_out << metrics::format(metrics::BudgetLine{budget_report(result.ledger, baseline)})
              << '\n';
  metrics_out.flush();
}

}  // namespace lze
