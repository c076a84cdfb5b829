#include <algorithm>
#include <cmath>
#include <map>

#include "lze/error.hpp"
#include "lze/sim.hpp"

namespace lze::sim {

GrpoStats grpo_step(ToyPolicy& policy, std::span<const SampledGroup> groups,
                    const GrpoOptions& options) {
  if (!(options.learn_rate >= 0.0) || !(options.clip_epsilon > 0.0) || options.inner_epochs < 1)
    throw Error(ErrorCode::InvalidParams, "grpo_step: bad learn rate, epsilon or inner epochs");

  struct Prepared {
    PromptId id;
    std::vector<std::size_t> answers;
    std::vector<double> advantages;
    std::vector<double> behavior_prob;  // pi_old(y_k)
  };
  std::vector<Prepared> batch;
  batch.reserve(groups.size());
  for (const SampledGroup& g : groups) {
    if (g.answers.size() != g.group.rewards.size())
      throw Error(ErrorCode::MismatchedGroup, "sampled answers and rewards differ in length");
    Prepared p{g.group.prompt, g.answers, group_advantages(g.group), {}};
    const std::vector<double> pi = policy.probabilities(p.id);
    const std::size_t correct = policy.correct_index(p.id);
    for (std::size_t k = 0; k < p.answers.size(); ++k) {
      if (p.answers[k] >= pi.size())
        throw Error(ErrorCode::MismatchedGroup, "sampled answer index out of range");
      if ((p.answers[k] == correct) != (g.group.rewards[k] == 1))
        throw Error(ErrorCode::MismatchedGroup, "reward disagrees with sampled answer");
      p.behavior_prob.push_back(pi[p.answers[k]]);
    }
    batch.push_back(std::move(p));
  }

  GrpoStats stats;
  const double lo = 1.0 - options.clip_epsilon;
  const double hi = 1.0 + options.clip_epsilon;
  for (std::uint32_t epoch = 0; epoch < options.inner_epochs; ++epoch) {
    // Gradients are accumulated against the pre-epoch policy, then applied.
    std::map<PromptId, std::vector<double>> grads;
    for (const Prepared& p : batch) {
      const std::vector<double> pi = policy.probabilities(p.id);
      const double inv_n = 1.0 / static_cast<double>(p.answers.size());
      std::vector<double>* grad = nullptr;
      for (std::size_t k = 0; k < p.answers.size(); ++k) {
        const double adv = p.advantages[k];
        // A zero advantage contributes an exactly zero gradient.
        if (adv == 0.0) continue;
        ++stats.terms;
        const std::size_t y = p.answers[k];
        const double ratio = pi[y] / p.behavior_prob[k];
        stats.max_ratio_deviation = std::max(stats.max_ratio_deviation, std::abs(ratio - 1.0));
        // min(ratio*A, clip(ratio)*A) takes the clipped, constant branch
        // exactly when the ratio has left the trust region in A's direction.
        if ((adv > 0.0 && ratio > hi) || (adv < 0.0 && ratio < lo)) {
          ++stats.clipped_terms;
          continue;
        }
        if (!grad) {
          grad = &grads[p.id];
          if (grad->empty()) grad->assign(pi.size(), 0.0);
        }
        // d ratio / d logits = ratio * (e_y - pi)
        const double w = inv_n * adv * ratio;
        for (std::size_t j = 0; j < pi.size(); ++j)
          (*grad)[j] += w * ((j == y ? 1.0 : 0.0) - pi[j]);
      }
    }
    for (auto& [id, g] : grads) {
      std::vector<double> logits = policy.logits(id);
      for (std::size_t j = 0; j < logits.size(); ++j) logits[j] += options.learn_rate * g[j];
      policy.set_logits(id, std::move(logits));
    }
  }
  return stats;
}

}  // namespace lze::sim
