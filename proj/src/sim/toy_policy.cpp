#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lze/error.hpp"
#include "lze/sim.hpp"

namespace lze::sim {

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (double& x : out) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : out) x /= z;
  return out;
}

ToyPolicy::ToyPolicy(std::size_t num_answers) : num_answers_(num_answers) {
  if (num_answers < 2) throw Error(ErrorCode::InvalidParams, "toy policy needs M >= 2 answers");
}

void ToyPolicy::add_prompt(PromptId id, std::vector<double> logits, std::size_t correct_index) {
  if (logits.size() != num_answers_)
    throw Error(ErrorCode::InvalidParams, "logit vector length must equal M");
  if (correct_index >= num_answers_)
    throw Error(ErrorCode::InvalidParams, "correct index out of range");
  entries_[id] = Entry{std::move(logits), correct_index};
}

std::vector<PromptId> ToyPolicy::prompts() const {
  std::vector<PromptId> ids;
  ids.reserve(entries_.size());
  for (const auto& [id, e] : entries_) ids.push_back(id);
  return ids;
}

const ToyPolicy::Entry& ToyPolicy::entry(PromptId id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end())
    throw Error(ErrorCode::UnknownPrompt, "policy has no prompt " + std::to_string(id.value));
  return it->second;
}

const std::vector<double>& ToyPolicy::logits(PromptId id) const { return entry(id).logits; }

void ToyPolicy::set_logits(PromptId id, std::vector<double> logits) {
  const Entry& e = entry(id);
  add_prompt(id, std::move(logits), e.correct);
}

std::size_t ToyPolicy::correct_index(PromptId id) const { return entry(id).correct; }

std::vector<double> ToyPolicy::probabilities(PromptId id) const {
  return softmax(entry(id).logits);
}

double ToyPolicy::pass_probability(PromptId id) const {
  const Entry& e = entry(id);
  return softmax(e.logits)[e.correct];
}

std::vector<double> ToyPolicy::pass_gradient(PromptId id) const {
  const Entry& e = entry(id);
  std::vector<double> pi = softmax(e.logits);
  const double pc = pi[e.correct];
  std::vector<double> grad(pi.size());
  for (std::size_t j = 0; j < pi.size(); ++j)
    grad[j] = pc * ((j == e.correct ? 1.0 : 0.0) - pi[j]);
  return grad;
}

double ToyPolicy::mean_pass_probability() const {
  if (entries_.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& [id, e] : entries_) acc += softmax(e.logits)[e.correct];
  return acc / static_cast<double>(entries_.size());
}

SampledGroup rollout(const ToyPolicy& policy, PromptId id, std::size_t n, RandomStream& rng) {
  if (n == 0) throw Error(ErrorCode::EmptyGroup, "rollout needs n >= 1");
  const std::vector<double> pi = policy.probabilities(id);
  const std::size_t correct = policy.correct_index(id);
  std::vector<double> cdf(pi.size());
  std::partial_sum(pi.begin(), pi.end(), cdf.begin());

  SampledGroup out;
  out.group.prompt = id;
  out.group.rewards.reserve(n);
  out.answers.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform_open() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto answer = static_cast<std::size_t>(it - cdf.begin());
    // Guard against a zero-probability tail absorbing u == cdf.back().
    answer = std::min(answer, pi.size() - 1);
    while (pi[answer] == 0.0 && answer > 0) --answer;
    out.answers.push_back(answer);
    out.group.rewards.push_back(answer == correct ? 1 : 0);
  }
  return out;
}

std::vector<double> group_advantages(const RolloutGroup& group) {
  const double p = pass_rate(group);
  std::vector<double> adv;
  adv.reserve(group.rewards.size());
  for (std::uint8_t r : group.rewards) adv.push_back(static_cast<double>(r) - p);
  return adv;
}

}  // namespace lze::sim
