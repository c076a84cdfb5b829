#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "lze/error.hpp"
#include "lze/sim.hpp"

namespace lze::sim {

const char* to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::LZE: return "lze";
    case Strategy::Uniform: return "uniform";
    case Strategy::FullData: return "full";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "lze") return Strategy::LZE;
  if (s == "uniform") return Strategy::Uniform;
  if (s == "full") return Strategy::FullData;
  return std::nullopt;
}

void validate(const SimEnvConfig& env) {
  if (env.num_prompts < 1) throw Error(ErrorCode::InvalidParams, "num_prompts must be >= 1");
  if (env.num_answers < 2) throw Error(ErrorCode::InvalidParams, "answers_per_prompt must be >= 2");
  if (env.n_rollouts < 1) throw Error(ErrorCode::InvalidParams, "n_rollouts must be >= 1");
  if (!(env.learn_rate >= 0.0) || !std::isfinite(env.learn_rate))
    throw Error(ErrorCode::InvalidParams, "learn_rate must be finite and >= 0");
  if (!(env.clip_epsilon > 0.0)) throw Error(ErrorCode::InvalidParams, "clip_epsilon must be > 0");
  if (env.inner_epochs < 1) throw Error(ErrorCode::InvalidParams, "inner_epochs must be >= 1");
  if (!(env.correct_logit_min <= env.correct_logit_max) || !(env.logit_noise >= 0.0))
    throw Error(ErrorCode::InvalidParams, "bad difficulty spread");
}

void validate(const LoopParams& p) {
  if (!(p.kappa > 0.0 && p.kappa <= 1.0))
    throw Error(ErrorCode::InvalidRatio, "kappa must lie in (0,1]");
  if (!(p.alpha >= 0.0 && p.alpha < 1.0))
    throw Error(ErrorCode::InvalidParams, "alpha must lie in [0,1)");
  if (!(p.lambda > 0.0 && p.lambda < 1.0))
    throw Error(ErrorCode::InvalidDecay, "lambda must lie in (0,1)");
  if (!(p.gumbel_scale >= 0.0) || !std::isfinite(p.gumbel_scale))
    throw Error(ErrorCode::InvalidParams, "gumbel_scale must be finite and >= 0");
  if (p.steps_per_epoch < 1) throw Error(ErrorCode::InvalidParams, "steps_per_epoch must be >= 1");
  validate(p.prune);
  validate(p.cost);
}

ToyPolicy make_policy(const SimEnvConfig& env) {
  validate(env);
  ToyPolicy policy(env.num_answers);
  for (std::uint32_t i = 0; i < env.num_prompts; ++i) {
    auto rng = RandomStream::derive(env.seed, StreamTag::InitPolicy, {i});
    const std::size_t correct = rng.index(env.num_answers);
    std::vector<double> logits(env.num_answers);
    for (double& x : logits) x = env.logit_noise > 0.0 ? rng.normal(0.0, env.logit_noise) : 0.0;
    logits[correct] = env.correct_logit_min +
                      (env.correct_logit_max - env.correct_logit_min) * rng.uniform_open();
    policy.add_prompt(PromptId{i}, std::move(logits), correct);
  }
  return policy;
}

std::optional<std::uint64_t> samples_to_threshold(std::span<const CurvePoint> curve,
                                                  double threshold) {
  for (const CurvePoint& c : curve)
    if (c.mean_pass_rate >= threshold) return c.gradient_samples;
  return std::nullopt;
}

ExperimentResult run_learning_experiment(const SimEnvConfig& env, const LoopParams& params,
                                         ExperimentObserver* observer) {
  return run_learning_experiment(make_policy(env), env, params, observer);
}

namespace {

class Loop {
 public:
  Loop(ToyPolicy policy, const SimEnvConfig& env, const LoopParams& params,
       ExperimentObserver* observer)
      : env_(env), params_(params), observer_(observer), policy_(std::move(policy)) {}

  ExperimentResult run() {
    initialize();
    for (std::uint64_t e = 1; e <= params_.epochs && !stopped_; ++e) run_epoch(e);
    ExperimentResult out{std::move(curve_), ledger_, std::move(*pool_), std::move(policy_),
                         data_passes_};
    return out;
  }

 private:
  void charge_rollouts(RolloutPhase phase) {
    for (std::uint32_t k = 0; k < env_.n_rollouts; ++k)
      ledger_record(ledger_, params_.cost,
                    RolloutGenerated{params_.cost.tokens_per_sample, phase});
  }

  void initialize() {
    std::map<PromptId, double> initial;
    for (PromptId id : policy_.prompts()) {
      auto rng = RandomStream::derive(env_.seed, StreamTag::InitRollout, {id.value});
      initial[id] = pass_rate(rollout(policy_, id, env_.n_rollouts, rng).group);
      charge_rollouts(RolloutPhase::Init);
    }
    pool_ = PromptPool::initialize(initial);
    const double mean = policy_.mean_pass_probability();
    curve_.push_back(CurvePoint{0, 0, mean});
    if (observer_) observer_->on_init(*pool_, mean);
    check_stop(mean);
  }

  void check_stop(double mean) {
    if (params_.stop_at_pass_rate && mean >= *params_.stop_at_pass_rate) stopped_ = true;
  }

  void replay(std::uint64_t epoch) {
    auto rng = RandomStream::derive(env_.seed, StreamTag::Replay, {epoch});
    const std::vector<PromptId> sampled = replay_sample(*pool_, params_.prune, rng);
    std::map<PromptId, double> results;
    for (PromptId id : sampled) {
      auto rr = RandomStream::derive(env_.seed, StreamTag::ReplayRollout, {epoch, id.value});
      results[id] = pass_rate(rollout(policy_, id, env_.n_rollouts, rr).group);
      charge_rollouts(RolloutPhase::Replay);
    }
    const std::vector<PromptId> restored = replay_restore(*pool_, results);
    if (observer_) observer_->on_replay(epoch, sampled, restored);
  }

  std::vector<std::vector<PromptId>> plan_epoch(std::uint64_t epoch) {
    std::vector<PromptId> active(pool_->active().begin(), pool_->active().end());
    std::vector<std::vector<PromptId>> batches;
    if (params_.batch_size == 0) {
      for (std::uint64_t s = 0; s < params_.steps_per_epoch; ++s) batches.push_back(active);
      pass_per_step_ = 1.0;
      return batches;
    }
    auto rng = RandomStream::derive(env_.seed, StreamTag::Minibatch, {epoch});
    std::shuffle(active.begin(), active.end(), rng.engine());
    for (std::size_t i = 0; i < active.size(); i += params_.batch_size) {
      const std::size_t end = std::min<std::size_t>(active.size(), i + params_.batch_size);
      std::vector<PromptId> batch(active.begin() + static_cast<std::ptrdiff_t>(i),
                                  active.begin() + static_cast<std::ptrdiff_t>(end));
      std::sort(batch.begin(), batch.end());
      batches.push_back(std::move(batch));
    }
    // An epoch with an empty active pool still advances time by one step.
    if (batches.empty()) batches.emplace_back();
    pass_per_step_ = 1.0 / static_cast<double>(batches.size());
    return batches;
  }

  std::vector<PromptId> choose(const std::vector<ScoredPrompt>& scored, std::uint64_t step) {
    SelectionDecision decision;
    switch (params_.strategy) {
      case Strategy::LZE: {
        auto rng = RandomStream::derive(env_.seed, StreamTag::Selection, {step});
        decision = select_top_k(scored, params_.kappa, params_.gumbel_scale, rng, step);
        break;
      }
      case Strategy::Uniform: {
        decision.step = step;
        decision.kappa = params_.kappa;
        decision.k_requested = selection_size(scored.size(), params_.kappa);
        auto rng = RandomStream::derive(env_.seed, StreamTag::UniformSelection, {step});
        std::vector<PromptId> ids;
        for (const ScoredPrompt& s : scored) {
          ids.push_back(s.id);
          decision.scores[s.id] = SelectionScore{s.energy, s.energy};
        }
        std::sample(ids.begin(), ids.end(), std::back_inserter(decision.selected),
                    decision.k_requested, rng.engine());
        break;
      }
      case Strategy::FullData:
        decision.step = step;
        decision.kappa = 1.0;
        decision.k_requested = scored.size();
        for (const ScoredPrompt& s : scored) {
          decision.selected.push_back(s.id);
          decision.scores[s.id] = SelectionScore{s.energy, s.energy};
        }
        break;
    }
    if (observer_) observer_->on_selection(decision);
    return decision.selected;
  }

  void run_step(std::uint64_t epoch, const std::vector<PromptId>& batch) {
    pool_->advance_step();
    const std::uint64_t step = pool_->step();

    std::map<PromptId, SampledGroup> groups;
    std::vector<ScoredPrompt> scored;
    scored.reserve(batch.size());
    double sampled_sum = 0.0;
    for (PromptId id : batch) {
      auto rng = RandomStream::derive(env_.seed, StreamTag::Rollout, {step, id.value});
      SampledGroup g = rollout(policy_, id, env_.n_rollouts, rng);
      charge_rollouts(RolloutPhase::Train);
      const double p = pass_rate(g.group);
      sampled_sum += p;
      const PromptRecord rec = pool_->apply_rollout_result(id, p, params_.lambda);
      const double e = energy_score(EnergyInputs{rec.d0, p, rec.momentum, params_.alpha},
                                    params_.factors);
      scored.push_back(ScoredPrompt{id, e});
      groups.emplace(id, std::move(g));
    }

    const std::vector<PromptId> selected = choose(scored, step);
    std::vector<SampledGroup> chosen;
    chosen.reserve(selected.size());
    for (PromptId id : selected) {
      chosen.push_back(groups.at(id));
      for (std::uint32_t k = 0; k < env_.n_rollouts; ++k)
        ledger_record(ledger_, params_.cost, SampleOptimized{params_.cost.tokens_per_sample});
    }
    grpo_step(policy_, chosen,
              GrpoOptions{env_.learn_rate, env_.clip_epsilon, env_.inner_epochs});
    gradient_samples_ += selected.size();
    data_passes_ += pass_per_step_;

    const double mean = policy_.mean_pass_probability();
    curve_.push_back(CurvePoint{step, gradient_samples_, mean});
    if (observer_) {
      StepReport r;
      r.step = step;
      r.epoch = epoch;
      r.rolled_out = batch.size();
      r.active = pool_->active().size();
      r.pruned = pool_->pruned().size();
      r.selected = selected.size();
      r.gradient_samples = gradient_samples_;
      r.mean_pass_rate = mean;
      r.mean_sampled_pass_rate =
          batch.empty() ? 0.0 : sampled_sum / static_cast<double>(batch.size());
      observer_->on_step(r, ledger_);
    }
    check_stop(mean);
  }

  void run_epoch(std::uint64_t epoch) {
    if (params_.pruning) replay(epoch);
    for (const auto& batch : plan_epoch(epoch)) {
      run_step(epoch, batch);
      if (stopped_) return;
    }
    if (params_.pruning) {
      const std::vector<PromptId> pruned = end_of_epoch_prune(*pool_, params_.prune);
      if (observer_) observer_->on_prune(epoch, pruned);
    }
    pool_->advance_epoch();
  }

  const SimEnvConfig& env_;
  const LoopParams& params_;
  ExperimentObserver* observer_;
  ToyPolicy policy_;
  std::optional<PromptPool> pool_;
  FlopsLedger ledger_;
  std::vector<CurvePoint> curve_;
  std::uint64_t gradient_samples_ = 0;
  double data_passes_ = 0.0;
  double pass_per_step_ = 1.0;
  bool stopped_ = false;
};

}  // namespace

ExperimentResult run_learning_experiment(ToyPolicy policy, const SimEnvConfig& env,
                                         const LoopParams& params,
                                         ExperimentObserver* observer) {
  validate(env);
  validate(params);
  if (policy.num_answers() != env.num_answers || policy.prompts().empty())
    throw Error(ErrorCode::InvalidParams, "policy does not match the environment config");
  return Loop(std::move(policy), env, params, observer).run();
}

}  // namespace lze::sim
