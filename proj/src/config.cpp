#include "lze/config.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>

#include "lze/error.hpp"
#include "lze/text.hpp"

namespace lze {

namespace {

[[noreturn]] void parse_fail(std::string_view key, std::string_view value, const char* want) {
  throw Error(ErrorCode::ParseError, "config key '" + std::string(key) + "': cannot parse '" +
                                         std::string(value) + "' as " + want);
}

[[noreturn]] void invalid(const char* key, const char* bound) {
  throw Error(ErrorCode::ValidationError, std::string(key) + " must satisfy " + bound);
}

double real(std::string_view key, std::string_view v) {
  const auto x = text::parse_real(v);
  if (!x) parse_fail(key, v, "a real number");
  return *x;
}

std::uint64_t uint(std::string_view key, std::string_view v) {
  const auto x = text::parse_uint(v);
  if (!x) parse_fail(key, v, "an unsigned integer");
  return *x;
}

std::uint32_t uint32(std::string_view key, std::string_view v) {
  const std::uint64_t x = uint(key, v);
  if (x > 0xffffffffULL) parse_fail(key, v, "a 32-bit unsigned integer");
  return static_cast<std::uint32_t>(x);
}

bool boolean(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  parse_fail(key, v, "a boolean");
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"kappa", [](RunConfig& c, auto k, auto v) { c.kappa = real(k, v); }},
      {"alpha", [](RunConfig& c, auto k, auto v) { c.alpha = real(k, v); }},
      {"lambda", [](RunConfig& c, auto k, auto v) { c.lambda = real(k, v); }},
      {"n_rollouts", [](RunConfig& c, auto k, auto v) { c.n_rollouts = uint32(k, v); }},
      {"t_prune", [](RunConfig& c, auto k, auto v) { c.t_prune = uint32(k, v); }},
      {"rho", [](RunConfig& c, auto k, auto v) { c.rho = real(k, v); }},
      {"gumbel_scale", [](RunConfig& c, auto k, auto v) { c.gumbel_scale = real(k, v); }},
      {"epochs", [](RunConfig& c, auto k, auto v) { c.epochs = uint(k, v); }},
      {"seed", [](RunConfig& c, auto k, auto v) { c.seed = uint(k, v); }},
      {"mode",
       [](RunConfig& c, auto k, auto v) {
         if (v == "sim") c.mode = Mode::Sim;
         else if (v == "select" || v == "log") c.mode = Mode::LogDriven;
         else if (v == "verify") c.mode = Mode::Verify;
         else if (v == "flops") c.mode = Mode::Flops;
         else parse_fail(k, v, "one of sim|select|verify|flops");
       }},
      {"strategy",
       [](RunConfig& c, auto k, auto v) {
         const auto s = sim::parse_strategy(v);
         if (!s) parse_fail(k, v, "one of lze|uniform|full");
         c.strategy = *s;
       }},
      {"use_difficulty", [](RunConfig& c, auto k, auto v) { c.factors.difficulty = boolean(k, v); }},
      {"use_uncertainty",
       [](RunConfig& c, auto k, auto v) { c.factors.uncertainty = boolean(k, v); }},
      {"use_momentum", [](RunConfig& c, auto k, auto v) { c.factors.momentum = boolean(k, v); }},
      {"pruning", [](RunConfig& c, auto k, auto v) { c.pruning = boolean(k, v); }},
      {"steps_per_epoch", [](RunConfig& c, auto k, auto v) { c.steps_per_epoch = uint(k, v); }},
      {"batch_size", [](RunConfig& c, auto k, auto v) { c.batch_size = uint(k, v); }},
      {"stop_at_pass_rate",
       [](RunConfig& c, auto k, auto v) {
         if (v == "none" || v.empty()) c.stop_at_pass_rate.reset();
         else c.stop_at_pass_rate = real(k, v);
       }},
      {"num_prompts", [](RunConfig& c, auto k, auto v) { c.sim.num_prompts = uint32(k, v); }},
      {"answers_per_prompt",
       [](RunConfig& c, auto k, auto v) { c.sim.num_answers = uint32(k, v); }},
      {"correct_logit_min",
       [](RunConfig& c, auto k, auto v) { c.sim.correct_logit_min = real(k, v); }},
      {"correct_logit_max",
       [](RunConfig& c, auto k, auto v) { c.sim.correct_logit_max = real(k, v); }},
      {"logit_noise", [](RunConfig& c, auto k, auto v) { c.sim.logit_noise = real(k, v); }},
      {"learn_rate", [](RunConfig& c, auto k, auto v) { c.sim.learn_rate = real(k, v); }},
      {"clip_epsilon", [](RunConfig& c, auto k, auto v) { c.sim.clip_epsilon = real(k, v); }},
      {"inner_epochs", [](RunConfig& c, auto k, auto v) { c.sim.inner_epochs = uint32(k, v); }},
      {"c_infer", [](RunConfig& c, auto k, auto v) { c.cost.c_infer = real(k, v); }},
      {"c_optim", [](RunConfig& c, auto k, auto v) { c.cost.c_optim = real(k, v); }},
      {"params", [](RunConfig& c, auto k, auto v) { c.cost.params = real(k, v); }},
      {"tokens_per_sample",
       [](RunConfig& c, auto k, auto v) { c.cost.tokens_per_sample = real(k, v); }},
      {"dataset_size", [](RunConfig& c, auto k, auto v) { c.dataset_size = uint(k, v); }},
      {"flops_epochs", [](RunConfig& c, auto k, auto v) { c.flops_epochs = real(k, v); }},
      {"verify_trials", [](RunConfig& c, auto k, auto v) { c.verify_trials = uint(k, v); }},
      {"input", [](RunConfig& c, auto, auto v) { c.input = std::string(v); }},
      {"output", [](RunConfig& c, auto, auto v) { c.output = std::string(v); }},
      {"metrics", [](RunConfig& c, auto, auto v) { c.metrics = std::string(v); }},
  };
  return table;
}

}  // namespace

const char* to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Sim: return "sim";
    case Mode::LogDriven: return "select";
    case Mode::Verify: return "verify";
    case Mode::Flops: return "flops";
  }
  return "?";
}

RunConfig default_config() {
  RunConfig cfg;
  if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
    const auto seed = text::parse_uint(env);
    if (!seed)
      throw Error(ErrorCode::ValidationError,
                  std::string(kSeedEnvVar) + " must be an unsigned integer");
    cfg.seed = *seed;
  }
  return cfg;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end())
    throw Error(ErrorCode::ParseError, "unknown config key '" + std::string(key) + "'");
  it->second(cfg, key, value);
}

RunConfig load_config(std::string_view source) { return load_config(source, default_config()); }

RunConfig load_config(std::string_view source, RunConfig cfg) {
  std::size_t line_no = 0;
  for (std::string_view raw : text::split(source, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string_view line = text::trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ParseError,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string_view key = text::trim(line.substr(0, eq));
    const std::string_view value = text::trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::ParseError,
                  "config line " + std::to_string(line_no) + ": empty key");
    apply_setting(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& c) {
  if (!(c.kappa > 0.0 && c.kappa <= 1.0)) invalid("kappa", "0 < kappa <= 1");
  if (!(c.alpha >= 0.0 && c.alpha < 1.0)) invalid("alpha", "0 <= alpha < 1");
  if (!(c.lambda > 0.0 && c.lambda < 1.0)) invalid("lambda", "0 < lambda < 1");
  if (c.n_rollouts < 1) invalid("n_rollouts", "n_rollouts >= 1");
  if (c.t_prune < 1) invalid("t_prune", "t_prune >= 1");
  if (!(c.rho >= 0.0 && c.rho <= 1.0)) invalid("rho", "0 <= rho <= 1");
  if (!(c.gumbel_scale >= 0.0) || !std::isfinite(c.gumbel_scale))
    invalid("gumbel_scale", "finite gumbel_scale >= 0");
  if (c.steps_per_epoch < 1) invalid("steps_per_epoch", "steps_per_epoch >= 1");
  if (c.stop_at_pass_rate && !(*c.stop_at_pass_rate >= 0.0 && *c.stop_at_pass_rate <= 1.0))
    invalid("stop_at_pass_rate", "0 <= stop_at_pass_rate <= 1");
  if (c.sim.num_prompts < 1) invalid("num_prompts", "num_prompts >= 1");
  if (c.sim.num_answers < 2) invalid("answers_per_prompt", "answers_per_prompt >= 2");
  if (!(c.sim.learn_rate >= 0.0) || !std::isfinite(c.sim.learn_rate))
    invalid("learn_rate", "finite learn_rate >= 0");
  if (!(c.sim.clip_epsilon > 0.0)) invalid("clip_epsilon", "clip_epsilon > 0");
  if (c.sim.inner_epochs < 1) invalid("inner_epochs", "inner_epochs >= 1");
  if (!(c.sim.correct_logit_min <= c.sim.correct_logit_max))
    invalid("correct_logit_min", "correct_logit_min <= correct_logit_max");
  if (!(c.sim.logit_noise >= 0.0)) invalid("logit_noise", "logit_noise >= 0");
  if (!(c.cost.c_infer > 0.0)) invalid("c_infer", "c_infer > 0");
  if (!(c.cost.c_optim > 0.0)) invalid("c_optim", "c_optim > 0");
  if (!(c.cost.params > 0.0)) invalid("params", "params > 0");
  if (!(c.cost.tokens_per_sample > 0.0)) invalid("tokens_per_sample", "tokens_per_sample > 0");
  if (c.dataset_size < 1) invalid("dataset_size", "dataset_size >= 1");
  if (!(c.flops_epochs > 0.0)) invalid("flops_epochs", "flops_epochs > 0");
  if (c.verify_trials < 2) invalid("verify_trials", "verify_trials >= 2");
}

sim::SimEnvConfig env_config(const RunConfig& cfg) {
  sim::SimEnvConfig env = cfg.sim;
  env.n_rollouts = cfg.n_rollouts;
  env.seed = cfg.seed;
  return env;
}

PruneConfig prune_config(const RunConfig& cfg) { return PruneConfig{cfg.t_prune, cfg.rho}; }

sim::LoopParams loop_params(const RunConfig& cfg) {
  sim::LoopParams p;
  p.strategy = cfg.strategy;
  p.kappa = cfg.kappa;
  p.alpha = cfg.alpha;
  p.lambda = cfg.lambda;
  p.gumbel_scale = cfg.gumbel_scale;
  p.factors = cfg.factors;
  p.prune = prune_config(cfg);
  p.pruning = cfg.pruning;
  p.epochs = cfg.epochs;
  p.steps_per_epoch = cfg.steps_per_epoch;
  p.batch_size = cfg.batch_size;
  p.stop_at_pass_rate = cfg.stop_at_pass_rate;
  p.cost = cfg.cost;
  return p;
}

}  // namespace lze
