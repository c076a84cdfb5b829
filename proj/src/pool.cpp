#include "lze/pool.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "lze/error.hpp"
#include "lze/text.hpp"

namespace lze {

namespace {

std::string id_str(PromptId id) { return std::to_string(id.value); }

[[noreturn]] void bad_checkpoint(const std::string& why) {
  throw Error(ErrorCode::ParseError, "pool checkpoint: " + why);
}

}  // namespace

const char* to_string(Membership m) noexcept {
  return m == Membership::Active ? "Active" : "Pruned";
}

bool is_probability(double p) noexcept { return p >= 0.0 && p <= 1.0; }

PromptPool PromptPool::initialize(const std::map<PromptId, double>& initial_pass_rates) {
  return initialize(initial_pass_rates, Options{});
}

PromptPool PromptPool::initialize(const std::map<PromptId, double>& initial_pass_rates,
                                  Options options) {
  if (initial_pass_rates.empty())
    throw Error(ErrorCode::EmptyPool, "cannot initialize an empty prompt pool");
  PromptPool pool;
  pool.keep_history_ = options.keep_history;
  for (const auto& [id, p] : initial_pass_rates) {
    if (!is_probability(p))
      throw Error(ErrorCode::InvalidProbability,
                  "initial pass rate of prompt " + id_str(id) + " outside [0,1]");
    PromptRecord rec;
    rec.id = id;
    rec.d0 = 1.0 - p;
    rec.ema = p;
    pool.records_.emplace(id, rec);
    pool.active_.insert(id);
    if (pool.keep_history_) pool.history_[id].push_back(p);
  }
  return pool;
}

std::vector<PromptRecord> PromptPool::snapshot_active() const {
  std::vector<PromptRecord> out;
  out.reserve(active_.size());
  for (PromptId id : active_) out.push_back(records_.at(id));
  return out;
}

PromptRecord PromptPool::apply_rollout_result(PromptId id, double pass_rate, double lambda) {
  PromptRecord& rec = mutable_record(id);
  if (rec.pool != Membership::Active)
    throw Error(ErrorCode::NotActive, "prompt " + id_str(id) + " is not active");
  if (!is_probability(pass_rate))
    throw Error(ErrorCode::InvalidProbability,
                "pass rate of prompt " + id_str(id) + " outside [0,1]");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw Error(ErrorCode::InvalidDecay, "EMA decay must lie in (0,1)");

  rec.momentum = pass_rate - rec.ema;
  rec.ema = lambda * rec.ema + (1.0 - lambda) * pass_rate;
  rec.last_pass_rate = pass_rate;
  if (keep_history_) history_[id].push_back(pass_rate);
  return rec;
}

const PromptRecord& PromptPool::record(PromptId id) const {
  const auto it = records_.find(id);
  if (it == records_.end())
    throw Error(ErrorCode::UnknownPrompt, "unknown prompt " + id_str(id));
  return it->second;
}

PromptRecord& PromptPool::mutable_record(PromptId id) {
  const auto it = records_.find(id);
  if (it == records_.end())
    throw Error(ErrorCode::UnknownPrompt, "unknown prompt " + id_str(id));
  return it->second;
}

const std::vector<double>& PromptPool::history(PromptId id) const {
  static const std::vector<double> empty;
  const auto it = history_.find(id);
  return it == history_.end() ? empty : it->second;
}

void PromptPool::set_membership(PromptId id, Membership m) {
  PromptRecord& rec = mutable_record(id);
  if (rec.pool == m) return;
  rec.pool = m;
  if (m == Membership::Pruned) {
    active_.erase(id);
    pruned_.insert(id);
  } else {
    pruned_.erase(id);
    active_.insert(id);
  }
}

void PromptPool::set_solved_streak(PromptId id, std::uint32_t streak) {
  mutable_record(id).solved_streak = streak;
}

void PromptPool::save(std::ostream& out) const {
  using text::format_real;
  out << "pool\tstep=" << step_ << "\tepoch=" << epoch_ << "\tsize=" << records_.size()
      << '\n';
  for (const auto& [id, r] : records_) {
    out << "record\tid=" << id.value << "\td0=" << format_real(r.d0)
        << "\tema=" << format_real(r.ema) << "\tmomentum=" << format_real(r.momentum)
        << "\tlast_pass_rate="
        << (r.last_pass_rate ? format_real(*r.last_pass_rate) : std::string("-"))
        << "\tsolved_streak=" << r.solved_streak << "\tpool=" << to_string(r.pool) << '\n';
  }
}

PromptPool PromptPool::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) bad_checkpoint("missing header");
  const auto header = text::parse_tagged(line);
  if (!header || header->kind != "pool") bad_checkpoint("bad header");

  auto uint_field = [](const text::TaggedLine& l, const char* key) {
    const std::string* v = l.find(key);
    if (!v) bad_checkpoint(std::string("missing field ") + key);
    const auto n = text::parse_uint(*v);
    if (!n) bad_checkpoint(std::string("bad field ") + key);
    return *n;
  };
  auto real_field = [](const text::TaggedLine& l, const char* key) {
    const std::string* v = l.find(key);
    if (!v) bad_checkpoint(std::string("missing field ") + key);
    const auto x = text::parse_real(*v);
    if (!x) bad_checkpoint(std::string("bad field ") + key);
    return *x;
  };

  PromptPool pool;
  pool.step_ = uint_field(*header, "step");
  pool.epoch_ = uint_field(*header, "epoch");
  const std::uint64_t size = uint_field(*header, "size");

  for (std::uint64_t i = 0; i < size; ++i) {
    if (!std::getline(in, line)) bad_checkpoint("truncated");
    const auto rl = text::parse_tagged(line);
    if (!rl || rl->kind != "record") bad_checkpoint("bad record line");
    PromptRecord r;
    r.id = PromptId{static_cast<std::uint32_t>(uint_field(*rl, "id"))};
    r.d0 = real_field(*rl, "d0");
    r.ema = real_field(*rl, "ema");
    r.momentum = real_field(*rl, "momentum");
    const std::string* lp = rl->find("last_pass_rate");
    if (!lp) bad_checkpoint("missing field last_pass_rate");
    if (*lp != "-") r.last_pass_rate = real_field(*rl, "last_pass_rate");
    r.solved_streak = static_cast<std::uint32_t>(uint_field(*rl, "solved_streak"));
    const std::string* m = rl->find("pool");
    if (!m || (*m != "Active" && *m != "Pruned")) bad_checkpoint("bad pool field");
    r.pool = *m == "Active" ? Membership::Active : Membership::Pruned;
    if (!pool.records_.emplace(r.id, r).second) bad_checkpoint("duplicate id");
    (r.pool == Membership::Active ? pool.active_ : pool.pruned_).insert(r.id);
  }
  return pool;
}

}  // namespace lze
