#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lze/energy.hpp"
#include "lze/flops.hpp"
#include "lze/pool.hpp"
#include "lze/prune.hpp"
#include "lze/rng.hpp"
#include "lze/select.hpp"

namespace lze::sim {

// One softmax over M candidate answers per prompt, exactly one of which the
// verifier accepts. The pass probability and its gradient are closed-form.
class ToyPolicy {
 public:
  explicit ToyPolicy(std::size_t num_answers);

  void add_prompt(PromptId id, std::vector<double> logits, std::size_t correct_index);

  std::size_t num_answers() const { return num_answers_; }
  bool contains(PromptId id) const { return entries_.count(id) != 0; }
  std::vector<PromptId> prompts() const;

  const std::vector<double>& logits(PromptId id) const;
  void set_logits(PromptId id, std::vector<double> logits);
  std::size_t correct_index(PromptId id) const;

  std::vector<double> probabilities(PromptId id) const;
  // p_i(theta): softmax mass on the correct answer.
  double pass_probability(PromptId id) const;
  // d p_i / d logits = p_i (e_c - pi).
  std::vector<double> pass_gradient(PromptId id) const;
  // Mean of pass_probability over every prompt (pruned ones included).
  double mean_pass_probability() const;

  friend bool operator==(const ToyPolicy&, const ToyPolicy&) = default;

 private:
  struct Entry {
    std::vector<double> logits;
    std::size_t correct = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  const Entry& entry(PromptId id) const;

  std::size_t num_answers_;
  std::map<PromptId, Entry> entries_;
};

std::vector<double> softmax(std::span<const double> logits);

// A rollout group together with the answers that produced it.
struct SampledGroup {
  RolloutGroup group;
  std::vector<std::size_t> answers;
};

SampledGroup rollout(const ToyPolicy& policy, PromptId id, std::size_t n, RandomStream& rng);

// r_k - p with p the group pass rate.
std::vector<double> group_advantages(const RolloutGroup& group);

struct GrpoOptions {
  double learn_rate = 1.0;
  double clip_epsilon = 0.2;
  // Ascent steps on the same batch. With 1, every importance ratio is 1 and
  // clipping never binds; more exercises the clip branch.
  std::uint32_t inner_epochs = 1;
};

struct GrpoStats {
  std::uint64_t terms = 0;          // (rollout, inner epoch) pairs with A != 0
  std::uint64_t clipped_terms = 0;  // of those, ones the clip zeroed
  double max_ratio_deviation = 0.0; // max |ratio - 1| seen
};

// Ascent on the clipped surrogate over `groups` only. Each group contributes
// (1/n) sum_k grad min(ratio_k A_k, clip(ratio_k) A_k) to its own prompt's
// logits; groups are not averaged against each other.
GrpoStats grpo_step(ToyPolicy& policy, std::span<const SampledGroup> groups,
                    const GrpoOptions& options);

// ---- oracles ----

struct VarianceReport {
  double empirical = 0.0;  // trace of the empirical covariance of g
  double predicted = 0.0;  // p(1-p) G / n
};

// Synthetic score vectors of constant squared norm G, orthogonal per reward
// outcome and mean-zero (random sign), so E[g] = 0 and the homogeneity
// assumption holds exactly. Baseline is the true p.
VarianceReport variance_oracle(double p, std::size_t n, std::uint64_t num_trials,
                               RandomStream& rng, double score_sq_norm = 1.0);

struct SoftmaxVarianceReport {
  double p = 0.0;
  double empirical = 0.0;
  double predicted = 0.0;         // p(1-p) G / n, G = E||grad log pi||^2
  double exact = 0.0;             // (E[(r-p)^2 ||s||^2] - ||grad p||^2) / n
  double grad_norm_sq = 0.0;
};

// Same estimator on the real softmax score function: the homogeneity and
// dropped-term approximations are not exact here, so this only reports.
SoftmaxVarianceReport softmax_variance_report(const ToyPolicy& policy, PromptId id,
                                              std::size_t n, std::uint64_t num_trials,
                                              RandomStream& rng);

// Global bound on half the spectral norm of the Hessian of a softmax
// component: |p(theta+d) - p(theta) - grad p . d| <= C ||d||^2.
inline constexpr double kSoftmaxRemainderConstant = 0.25;

struct TaylorReport {
  double lhs = 0.0;  // p(theta + delta) - p(theta)
  double rhs = 0.0;  // grad p(theta) . delta
  double grad_norm = 0.0;
  double delta_norm = 0.0;
  double remainder_bound = 0.0;  // C ||delta||^2
  bool remainder_ok = false;     // |lhs - rhs| <= C ||delta||^2
  bool cauchy_schwarz_ok = false;  // |lhs| <= ||grad p|| ||delta|| + C ||delta||^2
};

TaylorReport taylor_check(const ToyPolicy& policy, PromptId id, std::span<const double> delta);

// Central differences of pass_probability; independent of pass_gradient.
std::vector<double> finite_difference_gradient(const ToyPolicy& policy, PromptId id,
                                               double h);

// ---- learning experiment ----

struct SimEnvConfig {
  std::uint32_t num_prompts = 64;
  std::uint32_t num_answers = 16;
  std::uint32_t n_rollouts = 8;
  // Correct-answer logit is drawn uniformly from this range; the other
  // logits are N(0, logit_noise).
  double correct_logit_min = -1.0;
  double correct_logit_max = 3.0;
  double logit_noise = 0.5;
  double learn_rate = 2.0;
  double clip_epsilon = 0.2;
  std::uint32_t inner_epochs = 1;
  std::uint64_t seed = 0;
};

void validate(const SimEnvConfig& env);

ToyPolicy make_policy(const SimEnvConfig& env);

enum class Strategy { LZE, Uniform, FullData };

const char* to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view s);

struct LoopParams {
  Strategy strategy = Strategy::LZE;
  double kappa = 0.4;
  double alpha = 0.3;
  double lambda = 0.9;
  double gumbel_scale = 1.0;
  ScoreFactors factors;
  PruneConfig prune;
  bool pruning = true;
  std::uint64_t epochs = 100;
  // Full-pool mode: every step rolls out all of the active pool.
  std::uint64_t steps_per_epoch = 1;
  // Minibatch mode when non-zero: each epoch shuffles the active pool into
  // batches of this size, one step per batch.
  std::uint64_t batch_size = 0;
  // Stop once the mean true pass rate reaches this value.
  std::optional<double> stop_at_pass_rate;
  CostModel cost;
};

void validate(const LoopParams& params);

struct CurvePoint {
  std::uint64_t step = 0;
  std::uint64_t gradient_samples = 0;  // cumulative optimized prompt groups
  double mean_pass_rate = 0.0;         // analytic, over all prompts

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct StepReport {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  std::size_t rolled_out = 0;
  std::size_t active = 0;
  std::size_t pruned = 0;
  std::size_t selected = 0;
  std::uint64_t gradient_samples = 0;
  double mean_pass_rate = 0.0;
  double mean_sampled_pass_rate = 0.0;
};

class ExperimentObserver {
 public:
  virtual ~ExperimentObserver() = default;
  virtual void on_init(const PromptPool&, double /*mean_pass_rate*/) {}
  virtual void on_replay(std::uint64_t /*epoch*/, const std::vector<PromptId>& /*sampled*/,
                         const std::vector<PromptId>& /*restored*/) {}
  virtual void on_selection(const SelectionDecision&) {}
  virtual void on_step(const StepReport&, const FlopsLedger&) {}
  virtual void on_prune(std::uint64_t /*epoch*/, const std::vector<PromptId>& /*pruned*/) {}
};

struct ExperimentResult {
  std::vector<CurvePoint> curve;
  FlopsLedger ledger;
  PromptPool pool;
  ToyPolicy policy;
  // Passes over the data a full-data, no-pruning run of the same length makes.
  double data_passes = 0.0;
};

// The full training loop on the toy environment: initial scoring pass,
// per-epoch replay, per-step rollouts / EMA / energy / selection / update,
// epoch-end pruning.
ExperimentResult run_learning_experiment(const SimEnvConfig& env, const LoopParams& params,
                                         ExperimentObserver* observer = nullptr);

// Same loop on a caller-supplied initial policy.
ExperimentResult run_learning_experiment(ToyPolicy policy, const SimEnvConfig& env,
                                         const LoopParams& params,
                                         ExperimentObserver* observer = nullptr);

// Gradient samples consumed when the curve first reaches `threshold`.
std::optional<std::uint64_t> samples_to_threshold(std::span<const CurvePoint> curve,
                                                  double threshold);

}  // namespace lze::sim
