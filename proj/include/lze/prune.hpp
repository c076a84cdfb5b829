#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lze/pool.hpp"
#include "lze/rng.hpp"

namespace lze {

struct PruneConfig {
  std::uint32_t t_prune = 2;  // consecutive solved epochs before pruning
  double rho = 0.25;          // fraction of the prune pool replayed per epoch
};

void validate(const PruneConfig& cfg);

// Epoch boundary: extend or reset each active prompt's solved streak from its
// last pass rate, then prune every prompt whose streak reached t_prune.
// Returns the newly pruned ids in ascending order.
std::vector<PromptId> end_of_epoch_prune(PromptPool& pool, const PruneConfig& cfg);

// floor(rho * |pruned|) distinct pruned ids, uniformly without replacement,
// ascending.
std::vector<PromptId> replay_sample(const PromptPool& pool, const PruneConfig& cfg,
                                    RandomStream& rng);

// Moves every replayed prompt that is no longer fully solved back to the
// active pool with a zero streak. Still-solved prompts stay pruned and keep
// their streak. Returns restored ids, ascending.
std::vector<PromptId> replay_restore(PromptPool& pool,
                                     const std::map<PromptId, double>& results);

}  // namespace lze
