#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "lze/error.hpp"
#include "lze/metrics.hpp"
#include "lze/prune.hpp"
#include "lze/runner.hpp"
#include "lze/text.hpp"

namespace lze {

namespace {

struct LogRecord {
  std::size_t line_no = 0;
  RolloutGroup group;
};

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + why);
}

LogRecord parse_record(std::string_view line, std::size_t line_no, std::uint64_t& step) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto parts = text::split(line, '\t');
  if (parts.size() != 3) malformed(line_no, "expected step<TAB>prompt_id<TAB>rewards");
  const auto s = text::parse_uint(parts[0]);
  if (!s) malformed(line_no, "bad step '" + std::string(parts[0]) + "'");
  const auto id = text::parse_uint(parts[1]);
  if (!id || *id > 0xffffffffULL)
    malformed(line_no, "bad prompt id '" + std::string(parts[1]) + "'");
  LogRecord rec;
  rec.line_no = line_no;
  rec.group.prompt = PromptId{static_cast<std::uint32_t>(*id)};
  if (parts[2].empty()) malformed(line_no, "empty reward list");
  for (std::string_view r : text::split(parts[2], ',')) {
    if (r == "0") rec.group.rewards.push_back(0);
    else if (r == "1") rec.group.rewards.push_back(1);
    else malformed(line_no, "reward '" + std::string(r) + "' is not 0 or 1");
  }
  step = *s;
  return rec;
}

class Sidecar {
 public:
  Sidecar(const RunConfig& cfg, std::ostream& selections, std::ostream* metrics)
      : cfg_(cfg), selections_(selections), metrics_(metrics) {}

  void add(std::uint64_t step, LogRecord rec) {
    if (current_ && step < *current_)
      throw Error(ErrorCode::OutOfOrderStep,
                  "line " + std::to_string(rec.line_no) + ": step " + std::to_string(step) +
                      " after step " + std::to_string(*current_));
    if (current_ && step > *current_) flush();
    if (!pool_ && step != 0)
      throw Error(ErrorCode::UnknownPromptBeforeInit,
                  "line " + std::to_string(rec.line_no) +
                      ": rollouts before the step-0 initialization pass");
    current_ = step;
    if (!pending_.emplace(rec.group.prompt, rec).second)
      malformed(rec.line_no, "duplicate record for prompt " +
                                 std::to_string(rec.group.prompt.value) + " at step " +
                                 std::to_string(step));
  }

  void finish() {
    if (current_) flush();
    selections_.flush();
    if (metrics_) metrics_->flush();
  }

 private:
  void flush() {
    const std::uint64_t step = *current_;
    if (step == 0) {
      std::map<PromptId, double> initial;
      for (const auto& [id, rec] : pending_) initial[id] = pass_rate(rec.group);
      pool_ = PromptPool::initialize(initial);
    } else {
      score_and_select(step);
      maybe_end_epoch(step);
    }
    pending_.clear();
  }

  void score_and_select(std::uint64_t step) {
    std::vector<ScoredPrompt> scored;
    std::map<PromptId, double> replayed;
    for (const auto& [id, rec] : pending_) {
      if (!pool_->contains(id))
        throw Error(ErrorCode::UnknownPromptBeforeInit,
                    "line " + std::to_string(rec.line_no) + ": prompt " +
                        std::to_string(id.value) + " was not in the initialization pass");
      if (pool_->record(id).pool == Membership::Pruned) replayed[id] = pass_rate(rec.group);
    }
    // The trainer rolled out prompts we advised pruning: treat those groups as
    // replay results and only score the ones that come back.
    if (!replayed.empty()) {
      const auto restored = replay_restore(*pool_, replayed);
      if (metrics_) {
        std::vector<PromptId> sampled;
        for (const auto& [id, p] : replayed) sampled.push_back(id);
        *metrics_ << metrics::format(metrics::ReplayLine{epoch_ + 1, sampled, restored, true})
                  << '\n';
      }
    }
    for (const auto& [id, rec] : pending_) {
      if (pool_->record(id).pool != Membership::Active) continue;
      const double p = pass_rate(rec.group);
      const PromptRecord r = pool_->apply_rollout_result(id, p, cfg_.lambda);
      const double e =
          energy_score(EnergyInputs{r.d0, p, r.momentum, cfg_.alpha}, cfg_.factors);
      scored.push_back(ScoredPrompt{id, e});
    }
    auto rng = RandomStream::derive(cfg_.seed, StreamTag::Selection, {step});
    const SelectionDecision d = select_top_k(scored, cfg_.kappa, cfg_.gumbel_scale, rng, step);
    selections_ << metrics::format(metrics::trace_line(d)) << '\n';
    if (metrics_) *metrics_ << metrics::format(metrics::selection_line(d)) << '\n';
  }

  void maybe_end_epoch(std::uint64_t step) {
    if (!cfg_.pruning) return;
    if (step / cfg_.steps_per_epoch == last_epoch_boundary_) return;
    last_epoch_boundary_ = step / cfg_.steps_per_epoch;
    ++epoch_;
    const PruneConfig pc = prune_config(cfg_);
    const auto pruned = end_of_epoch_prune(*pool_, pc);
    auto rng = RandomStream::derive(cfg_.seed, StreamTag::Replay, {epoch_});
    const auto replay = replay_sample(*pool_, pc, rng);
    if (!metrics_) return;
    if (!pruned.empty())
      *metrics_ << metrics::format(metrics::PruneLine{epoch_, pruned, true}) << '\n';
    if (!replay.empty())
      *metrics_ << metrics::format(metrics::ReplayLine{epoch_ + 1, replay, {}, true}) << '\n';
  }

  const RunConfig& cfg_;
  std::ostream& selections_;
  std::ostream* metrics_;
  std::optional<PromptPool> pool_;
  std::optional<std::uint64_t> current_;
  std::map<PromptId, LogRecord> pending_;
  std::uint64_t epoch_ = 0;
  std::uint64_t last_epoch_boundary_ = 0;
};

}  // namespace

void run_log_driven(const RunConfig& cfg, std::istream& in, std::ostream& selections_out,
                    std::ostream* metrics_out) {
  validate(cfg);
  Sidecar sidecar(cfg, selections_out, metrics_out);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::uint64_t step = 0;
    LogRecord rec = parse_record(line, line_no, step);
    sidecar.add(step, std::move(rec));
  }
  sidecar.finish();
}

}  // namespace lze
