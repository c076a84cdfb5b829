#include "lze/select.hpp"

#include <algorithm>
#include <cmath>

#include "lze/error.hpp"

namespace lze {

double gumbel_from_uniform(double u) { return -std::log(-std::log(u)); }

double gumbel_sample(RandomStream& rng) { return gumbel_from_uniform(rng.uniform_open()); }

std::size_t selection_size(std::size_t pool_size, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw Error(ErrorCode::InvalidRatio, "selection ratio kappa must lie in (0,1]");
  if (pool_size == 0) return 0;
  // The slack absorbs products like 0.29 * 100 = 28.999999999999996.
  const auto k = static_cast<std::size_t>(
      std::floor(kappa * static_cast<double>(pool_size) + 1e-9));
  return std::clamp<std::size_t>(k, 1, pool_size);
}

SelectionDecision select_top_k(std::span<const ScoredPrompt> snapshot, double kappa,
                               double gumbel_scale, RandomStream& rng, std::uint64_t step) {
  if (!(gumbel_scale >= 0.0) || !std::isfinite(gumbel_scale))
    throw Error(ErrorCode::InvalidInputs, "gumbel scale must be finite and non-negative");

  SelectionDecision decision;
  decision.step = step;
  decision.kappa = kappa;
  decision.k_requested = selection_size(snapshot.size(), kappa);
  if (snapshot.empty()) return decision;

  struct Candidate {
    PromptId id;
    double perturbed;
  };
  std::vector<ScoredPrompt> ordered(snapshot.begin(), snapshot.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const ScoredPrompt& a, const ScoredPrompt& b) { return a.id < b.id; });

  std::vector<Candidate> candidates;
  candidates.reserve(ordered.size());
  for (const ScoredPrompt& s : ordered) {
    double perturbed = s.energy;
    if (gumbel_scale > 0.0) perturbed += gumbel_scale * gumbel_sample(rng);
    decision.scores[s.id] = SelectionScore{s.energy, perturbed};
    candidates.push_back({s.id, perturbed});
  }

  const auto better = [](const Candidate& a, const Candidate& b) {
    if (a.perturbed != b.perturbed) return a.perturbed > b.perturbed;
    return a.id < b.id;
  };
  const auto k = static_cast<std::ptrdiff_t>(decision.k_requested);
  std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), better);

  decision.selected.reserve(decision.k_requested);
  for (std::ptrdiff_t i = 0; i < k; ++i) decision.selected.push_back(candidates[i].id);
  std::sort(decision.selected.begin(), decision.selected.end());
  return decision;
}

}  // namespace lze
