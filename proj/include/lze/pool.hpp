#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace lze {

struct PromptId {
  std::uint32_t value = 0;

  friend auto operator<=>(const PromptId&, const PromptId&) = default;
};

enum class Membership { Active, Pruned };

const char* to_string(Membership m) noexcept;

struct PromptRecord {
  PromptId id;
  double d0 = 0.0;        // difficulty anchor, 1 - initial pass rate; frozen
  double ema = 0.0;       // smoothed pass rate
  double momentum = 0.0;  // latest pass rate minus the EMA before it advanced
  std::optional<double> last_pass_rate;
  std::uint32_t solved_streak = 0;
  Membership pool = Membership::Active;

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

bool is_probability(double p) noexcept;

// Per-prompt state plus the active/pruned partition. One coordinator owns a
// PromptPool and serializes all mutations; snapshots are plain copies.
class PromptPool {
 public:
  struct Options {
    // Keep every observed pass rate (initial one included). Debug aid for
    // checking the recurrent EMA against its closed-form unroll.
    bool keep_history = false;
  };

  static PromptPool initialize(const std::map<PromptId, double>& initial_pass_rates);
  static PromptPool initialize(const std::map<PromptId, double>& initial_pass_rates,
                               Options options);

  std::vector<PromptRecord> snapshot_active() const;

  // Advances the EMA of an active prompt. The momentum is taken against the
  // EMA from before this call.
  PromptRecord apply_rollout_result(PromptId id, double pass_rate, double lambda);

  const PromptRecord& record(PromptId id) const;
  bool contains(PromptId id) const { return records_.count(id) != 0; }

  const std::set<PromptId>& active() const { return active_; }
  const std::set<PromptId>& pruned() const { return pruned_; }
  std::size_t size() const { return records_.size(); }
  const std::map<PromptId, PromptRecord>& records() const { return records_; }

  // Empty unless Options::keep_history was set.
  const std::vector<double>& history(PromptId id) const;

  std::uint64_t step() const { return step_; }
  std::uint64_t epoch() const { return epoch_; }
  void advance_step() { ++step_; }
  void advance_epoch() { ++epoch_; }

  // Mutators used by the epoch-boundary bookkeeping.
  void set_membership(PromptId id, Membership m);
  void set_solved_streak(PromptId id, std::uint32_t streak);

  // Checkpoint format: a header line followed by one record per line, fields
  // in declaration order, doubles at 17 significant digits.
  void save(std::ostream& out) const;
  static PromptPool load(std::istream& in);

  friend bool operator==(const PromptPool&, const PromptPool&) = default;

 private:
  PromptRecord& mutable_record(PromptId id);

  std::map<PromptId, PromptRecord> records_;
  std::set<PromptId> active_;
  std::set<PromptId> pruned_;
  std::map<PromptId, std::vector<double>> history_;
  bool keep_history_ = false;
  std::uint64_t step_ = 0;
  std::uint64_t epoch_ = 0;
};

}  // namespace lze
