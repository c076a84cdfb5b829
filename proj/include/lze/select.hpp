#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lze/pool.hpp"
#include "lze/rng.hpp"

namespace lze {

struct ScoredPrompt {
  PromptId id;
  double energy = 0.0;
};

struct SelectionScore {
  double energy = 0.0;
  double perturbed = 0.0;

  friend bool operator==(const SelectionScore&, const SelectionScore&) = default;
};

struct SelectionDecision {
  std::uint64_t step = 0;
  std::vector<PromptId> selected;  // ascending id
  std::map<PromptId, SelectionScore> scores;
  std::size_t k_requested = 0;
  double kappa = 0.0;

  friend bool operator==(const SelectionDecision&, const SelectionDecision&) = default;
};

// -ln(-ln(u)) for u in (0,1).
double gumbel_from_uniform(double u);
double gumbel_sample(RandomStream& rng);

// floor(kappa * n), clamped to at least 1 for a non-empty pool.
std::size_t selection_size(std::size_t pool_size, double kappa);

// Gumbel-Top-K over energies. Noise is drawn in ascending id order, so the
// result does not depend on the order of `snapshot`. Ties in the perturbed
// score go to the smaller id.
SelectionDecision select_top_k(std::span<const ScoredPrompt> snapshot, double kappa,
                               double gumbel_scale, RandomStream& rng,
                               std::uint64_t step = 0);

}  // namespace lze
