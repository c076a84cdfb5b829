#include "lze/prune.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "lze/error.hpp"

namespace lze {

void validate(const PruneConfig& cfg) {
  if (cfg.t_prune < 1) throw Error(ErrorCode::InvalidParams, "t_prune must be >= 1");
  if (!is_probability(cfg.rho)) throw Error(ErrorCode::InvalidParams, "rho must lie in [0,1]");
}

std::vector<PromptId> end_of_epoch_prune(PromptPool& pool, const PruneConfig& cfg) {
  validate(cfg);
  std::vector<PromptId> moved;
  // Copy: set_membership mutates the active set while we walk it.
  const std::vector<PromptId> active(pool.active().begin(), pool.active().end());
  for (PromptId id : active) {
    const PromptRecord& rec = pool.record(id);
    const bool solved = rec.last_pass_rate && *rec.last_pass_rate == 1.0;
    const std::uint32_t streak = solved ? rec.solved_streak + 1 : 0;
    pool.set_solved_streak(id, streak);
    if (streak >= cfg.t_prune) {
      pool.set_membership(id, Membership::Pruned);
      moved.push_back(id);
    }
  }
  return moved;
}

std::vector<PromptId> replay_sample(const PromptPool& pool, const PruneConfig& cfg,
                                    RandomStream& rng) {
  validate(cfg);
  const auto& pruned = pool.pruned();
  const auto count = static_cast<std::size_t>(
      std::floor(cfg.rho * static_cast<double>(pruned.size()) + 1e-9));
  std::vector<PromptId> out;
  if (count == 0) return out;
  out.reserve(count);
  // std::sample on a forward range keeps the source order, so `out` is sorted.
  std::sample(pruned.begin(), pruned.end(), std::back_inserter(out), count, rng.engine());
  return out;
}

std::vector<PromptId> replay_restore(PromptPool& pool,
                                     const std::map<PromptId, double>& results) {
  for (const auto& [id, p] : results) {
    if (pool.record(id).pool != Membership::Pruned)
      throw Error(ErrorCode::NotPruned, "prompt " + std::to_string(id.value) + " is not pruned");
    if (!is_probability(p))
      throw Error(ErrorCode::InvalidProbability,
                  "replay pass rate of prompt " + std::to_string(id.value) + " outside [0,1]");
  }
  std::vector<PromptId> restored;
  for (const auto& [id, p] : results) {
    if (p < 1.0) {
      pool.set_membership(id, Membership::Active);
      pool.set_solved_streak(id, 0);
      restored.push_back(id);
    }
  }
  return restored;
}

}  // namespace lze
