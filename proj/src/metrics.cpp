#include "lze/metrics.hpp"

#include "lze/error.hpp"
#include "lze/text.hpp"

namespace lze::metrics {

namespace {

using text::format_real;

std::string join_ids(const std::vector<PromptId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i].value);
  }
  return out;
}

std::string join_reals(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_real(xs[i]);
  }
  return out;
}

[[noreturn]] void fail(std::string_view line, const std::string& why) {
  throw Error(ErrorCode::ParseError, "metrics line '" + std::string(line) + "': " + why);
}

class FieldReader {
 public:
  FieldReader(const text::TaggedLine& tl, std::string_view raw) : tl_(tl), raw_(raw) {}

  const std::string& get(const char* key) {
    if (next_ >= tl_.fields.size() || tl_.fields[next_].first != key)
      fail(raw_, std::string("expected field ") + key);
    return tl_.fields[next_++].second;
  }
  std::uint64_t u(const char* key) {
    const auto v = text::parse_uint(get(key));
    if (!v) fail(raw_, std::string("bad integer in ") + key);
    return *v;
  }
  double r(const char* key) {
    const auto v = text::parse_real(get(key));
    if (!v) fail(raw_, std::string("bad real in ") + key);
    return *v;
  }
  bool b(const char* key) {
    const std::string& v = get(key);
    if (v != "0" && v != "1") fail(raw_, std::string("bad flag in ") + key);
    return v == "1";
  }
  std::vector<PromptId> ids(const char* key) { return parse_ids(get(key), raw_); }
  std::vector<double> reals(const char* key) { return parse_reals(get(key), raw_); }
  void done() {
    if (next_ != tl_.fields.size()) fail(raw_, "unexpected trailing fields");
  }

  static std::vector<PromptId> parse_ids(std::string_view s, std::string_view raw) {
    std::vector<PromptId> out;
    if (s.empty()) return out;
    for (std::string_view part : text::split(s, ',')) {
      const auto v = text::parse_uint(part);
      if (!v || *v > 0xffffffffULL) fail(raw, "bad prompt id");
      out.push_back(PromptId{static_cast<std::uint32_t>(*v)});
    }
    return out;
  }
  static std::vector<double> parse_reals(std::string_view s, std::string_view raw) {
    std::vector<double> out;
    if (s.empty()) return out;
    for (std::string_view part : text::split(s, ',')) {
      const auto v = text::parse_real(part);
      if (!v) fail(raw, "bad real");
      out.push_back(*v);
    }
    return out;
  }

 private:
  const text::TaggedLine& tl_;
  std::string_view raw_;
  std::size_t next_ = 0;
};

struct Formatter {
  text::TaggedLine operator()(const StepLine& s) const {
    return {"Step",
            {{"step", std::to_string(s.step)},
             {"epoch", std::to_string(s.epoch)},
             {"active", std::to_string(s.active)},
             {"pruned", std::to_string(s.pruned)},
             {"rolled_out", std::to_string(s.rolled_out)},
             {"selected", std::to_string(s.selected)},
             {"gradient_samples", std::to_string(s.gradient_samples)},
             {"mean_pass_rate", format_real(s.mean_pass_rate)},
             {"mean_sampled_pass_rate", format_real(s.mean_sampled_pass_rate)},
             {"inference_flops", format_real(s.inference_flops)},
             {"optimization_flops", format_real(s.optimization_flops)}}};
  }
  text::TaggedLine operator()(const SelectionLine& s) const {
    return {"Selection",
            {{"step", std::to_string(s.step)},
             {"k", std::to_string(s.k)},
             {"ids", join_ids(s.ids)},
             {"energies", join_reals(s.energies)},
             {"perturbed", join_reals(s.perturbed)}}};
  }
  text::TaggedLine operator()(const PruneLine& s) const {
    return {"Prune",
            {{"epoch", std::to_string(s.epoch)},
             {"ids", join_ids(s.ids)},
             {"advisory", s.advisory ? "1" : "0"}}};
  }
  text::TaggedLine operator()(const ReplayLine& s) const {
    return {"Replay",
            {{"epoch", std::to_string(s.epoch)},
             {"sampled", join_ids(s.sampled)},
             {"restored", join_ids(s.restored)},
             {"advisory", s.advisory ? "1" : "0"}}};
  }
  text::TaggedLine operator()(const BudgetLine& b) const {
    const BudgetReport& r = b.report;
    return {"Budget",
            {{"inference_flops", format_real(r.inference_flops)},
             {"optimization_flops", format_real(r.optimization_flops)},
             {"total", format_real(r.total)},
             {"savings_vs_baseline", format_real(r.savings_vs_baseline)},
             {"replay_flops", format_real(r.replay_flops)},
             {"init_flops", format_real(r.init_flops)}}};
  }
};

}  // namespace

std::string format(const MetricsLine& line) {
  return text::format_tagged(std::visit(Formatter{}, line));
}

MetricsLine parse(std::string_view raw) {
  const auto tl = text::parse_tagged(raw);
  if (!tl) fail(raw, "not a tagged line");
  FieldReader f(*tl, raw);
  MetricsLine out;
  if (tl->kind == "Step") {
    StepLine s;
    s.step = f.u("step");
    s.epoch = f.u("epoch");
    s.active = f.u("active");
    s.pruned = f.u("pruned");
    s.rolled_out = f.u("rolled_out");
    s.selected = f.u("selected");
    s.gradient_samples = f.u("gradient_samples");
    s.mean_pass_rate = f.r("mean_pass_rate");
    s.mean_sampled_pass_rate = f.r("mean_sampled_pass_rate");
    s.inference_flops = f.r("inference_flops");
    s.optimization_flops = f.r("optimization_flops");
    out = s;
  } else if (tl->kind == "Selection") {
    SelectionLine s;
    s.step = f.u("step");
    s.k = f.u("k");
    s.ids = f.ids("ids");
    s.energies = f.reals("energies");
    s.perturbed = f.reals("perturbed");
    if (s.energies.size() != s.ids.size() || s.perturbed.size() != s.ids.size())
      fail(raw, "id and score lists differ in length");
    out = s;
  } else if (tl->kind == "Prune") {
    PruneLine s;
    s.epoch = f.u("epoch");
    s.ids = f.ids("ids");
    s.advisory = f.b("advisory");
    out = s;
  } else if (tl->kind == "Replay") {
    ReplayLine s;
    s.epoch = f.u("epoch");
    s.sampled = f.ids("sampled");
    s.restored = f.ids("restored");
    s.advisory = f.b("advisory");
    out = s;
  } else if (tl->kind == "Budget") {
    BudgetLine b;
    b.report.inference_flops = f.r("inference_flops");
    b.report.optimization_flops = f.r("optimization_flops");
    b.report.total = f.r("total");
    b.report.savings_vs_baseline = f.r("savings_vs_baseline");
    b.report.replay_flops = f.r("replay_flops");
    b.report.init_flops = f.r("init_flops");
    out = b;
  } else {
    fail(raw, "unknown kind '" + tl->kind + "'");
  }
  f.done();
  return out;
}

SelectionLine selection_line(const SelectionDecision& d) {
  SelectionLine s;
  s.step = d.step;
  s.k = d.k_requested;
  s.ids = d.selected;
  for (PromptId id : d.selected) {
    const SelectionScore& sc = d.scores.at(id);
    s.energies.push_back(sc.energy);
    s.perturbed.push_back(sc.perturbed);
  }
  return s;
}

std::string format(const TraceLine& line) {
  return std::to_string(line.step) + '\t' + join_ids(line.ids) + '\t' +
         join_reals(line.energies);
}

TraceLine parse_trace(std::string_view raw) {
  const auto parts = text::split(raw, '\t');
  if (parts.size() != 3) fail(raw, "trace line needs three tab-separated fields");
  TraceLine t;
  const auto step = text::parse_uint(parts[0]);
  if (!step) fail(raw, "bad step");
  t.step = *step;
  t.ids = FieldReader::parse_ids(parts[1], raw);
  t.energies = FieldReader::parse_reals(parts[2], raw);
  if (t.ids.size() != t.energies.size()) fail(raw, "id and energy lists differ in length");
  return t;
}

TraceLine trace_line(const SelectionDecision& d) {
  TraceLine t;
  t.step = d.step;
  t.ids = d.selected;
  for (PromptId id : d.selected) t.energies.push_back(d.scores.at(id).energy);
  return t;
}

}  // namespace lze::metrics
