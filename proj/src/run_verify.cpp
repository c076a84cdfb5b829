#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "lze/energy.hpp"
#include "lze/flops.hpp"
#include "lze/metrics.hpp"
#include "lze/runner.hpp"
#include "lze/sim.hpp"
#include "lze/text.hpp"

namespace lze {

namespace {

std::string short_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Recurrent EMA (the pool's update rule) against the closed-form unroll, on
// random pass-rate sequences. Also reports the untruncated kernel's gap.
std::vector<CheckResult> duality_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  for (double lambda : {0.5, 0.9, 0.99}) {
    double worst = 0.0;
    double worst_truncated = 0.0;
    for (std::uint64_t seq = 0; seq < 100; ++seq) {
      auto rng = RandomStream::derive(seed, StreamTag::Oracle,
                                      {1, seq, static_cast<std::uint64_t>(lambda * 1000)});
      std::vector<double> history{rng.uniform_open()};
      PromptPool pool = PromptPool::initialize({{PromptId{0}, history[0]}});
      for (std::size_t t = 1; t < 200; ++t) {
        history.push_back(rng.uniform_open());
        const PromptRecord r = pool.apply_rollout_result(PromptId{0}, history.back(), lambda);
        worst = std::max(worst, std::abs(r.ema - ema_kernel_convolve(history, lambda)));
        worst = std::max(worst,
                         std::abs(r.momentum - momentum_from_history(history, lambda)));
        worst_truncated =
            std::max(worst_truncated, std::abs(r.ema - truncated_kernel_convolve(history, lambda)));
      }
    }
    out.push_back({"ema-duality lambda=" + short_real(lambda), worst <= 1e-12,
                   fmt("max |recurrent - kernel| = %.3e (tol 1e-12); untruncated kernel gap "
                       "= %.3e (informational)",
                       worst, worst_truncated)});
  }
  return out;
}

std::vector<CheckResult> variance_checks(std::uint64_t seed, std::uint64_t trials) {
  std::vector<CheckResult> out;
  const double ps[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (std::size_t n : {4u, 8u}) {
    double best_predicted = -1.0;
    double best_p = 0.0;
    for (double p : ps) {
      auto rng = RandomStream::derive(seed, StreamTag::Oracle,
                                      {2, n, static_cast<std::uint64_t>(p * 10)});
      const sim::VarianceReport r = sim::variance_oracle(p, n, trials, rng);
      const double rel = std::abs(r.empirical - r.predicted) / r.predicted;
      out.push_back({"variance-law p=" + short_real(p) + " n=" + std::to_string(n),
                     rel <= 0.05,
                     fmt("empirical %.6g predicted %.6g rel.err %.3e (tol 5e-2)", r.empirical,
                         r.predicted, rel)});
      if (r.empirical > best_predicted) {
        best_predicted = r.empirical;
        best_p = p;
      }
    }
    out.push_back({"variance-peak n=" + std::to_string(n), best_p == 0.5,
                   fmt("largest empirical variance at p=%.1f", best_p)});
  }
  // Real softmax score function: neither approximation is exact, so this
  // line only reports the gap.
  sim::ToyPolicy policy(16);
  std::vector<double> logits(16, 0.0);
  logits[0] = std::log(15.0);  // p = 0.5
  policy.add_prompt(PromptId{0}, logits, 0);
  auto rng = RandomStream::derive(seed, StreamTag::Oracle, {4});
  const auto r = sim::softmax_variance_report(policy, PromptId{0}, 8,
                                              std::min<std::uint64_t>(trials, 200000), rng);
  out.push_back({"variance-softmax-gap (informational)", true,
                 fmt("empirical %.6g, p(1-p)G/n %.6g, with grad-p term %.6g", r.empirical,
                     r.predicted, r.exact)});
  return out;
}

std::vector<CheckResult> taylor_checks(std::uint64_t seed) {
  double worst_fd = 0.0;
  std::size_t bound_failures = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto rng = RandomStream::derive(seed, StreamTag::Oracle, {3, i});
    const std::size_t m = 2 + rng.index(15);
    sim::ToyPolicy policy(m);
    std::vector<double> logits(m);
    for (double& x : logits) x = rng.normal(0.0, 1.5);
    const PromptId id{0};
    policy.add_prompt(id, logits, rng.index(m));

    const std::vector<double> analytic = policy.pass_gradient(id);
    const std::vector<double> fd = sim::finite_difference_gradient(policy, id, 1e-5);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      diff += (analytic[j] - fd[j]) * (analytic[j] - fd[j]);
      norm += analytic[j] * analytic[j];
    }
    worst_fd = std::max(worst_fd, std::sqrt(diff) / std::sqrt(norm));

    std::vector<double> delta(m);
    for (double& x : delta) x = rng.normal();
    double dn = 0.0;
    for (double x : delta) dn += x * x;
    const double scale = 1e-5 * (1.0 + 99.0 * rng.uniform_open()) / std::sqrt(dn);
    for (double& x : delta) x *= scale;
    const sim::TaylorReport t = sim::taylor_check(policy, id, delta);
    if (!t.remainder_ok || !t.cauchy_schwarz_ok) ++bound_failures;
  }
  return {
      {"softmax-gradient-vs-central-differences", worst_fd <= 1e-6,
       fmt("max relative error %.3e over 100 policies (tol 1e-6)", worst_fd)},
      {"taylor-cauchy-schwarz-bound", bound_failures == 0,
       fmt("%.0f of 100 (policy, delta) pairs violate |dp| <= |grad p||delta| + C|delta|^2",
           static_cast<double>(bound_failures))},
  };
}

CheckResult vanishing_check() {
  sim::ToyPolicy policy(4);
  policy.add_prompt(PromptId{0}, {0.3, -0.2, 1.1, 0.0}, 2);
  policy.add_prompt(PromptId{1}, {0.5, 0.5, -1.0, 2.0}, 0);
  const sim::ToyPolicy before = policy;
  const sim::SampledGroup solved{{PromptId{0}, {1, 1, 1, 1}}, {2, 2, 2, 2}};
  const sim::SampledGroup failed{{PromptId{1}, {0, 0, 0, 0}}, {1, 3, 3, 2}};
  const std::vector<sim::SampledGroup> groups{solved, failed};
  sim::grpo_step(policy, groups, sim::GrpoOptions{1.0, 0.2, 1});
  return {"gradient-vanishes-at-extremes", policy == before,
          policy == before ? "all-correct and all-incorrect groups leave logits bit-identical"
                           : "logits changed"};
}

std::vector<CheckResult> savings_checks(const RunConfig& cfg) {
  const CostModel defaults;
  const double coeff = lze_coefficient(defaults, 0.4);
  const double saved = savings_ratio(defaults, 0.4);
  std::vector<CheckResult> out{
      {"flops-coefficient kappa=0.4", coeff == 6.4, fmt("c_infer + 0.4 c_optim = %.17g", coeff)},
      {"flops-savings kappa=0.4", saved == 0.36,
       fmt("saved %.2f%% (exact value %.17g)", saved * 100.0, saved)},
  };
  if (cfg.kappa != 0.4) {
    const double s = savings_ratio(cfg.cost, cfg.kappa);
    out.push_back({"flops-savings configured kappa", s >= 0.0 && s < 1.0,
                   fmt("kappa %.4g saves %.2f%%", cfg.kappa, s * 100.0)});
  }
  return out;
}

}  // namespace

std::vector<CheckResult> verify_checks(const RunConfig& cfg) {
  validate(cfg);
  std::vector<CheckResult> all;
  for (auto& c : duality_checks(cfg.seed)) all.push_back(std::move(c));
  for (auto& c : variance_checks(cfg.seed, cfg.verify_trials)) all.push_back(std::move(c));
  for (auto& c : taylor_checks(cfg.seed)) all.push_back(std::move(c));
  all.push_back(vanishing_check());
  for (auto& c : savings_checks(cfg)) all.push_back(std::move(c));
  return all;
}

bool run_verify(const RunConfig& cfg, std::ostream& out) {
  bool ok = true;
  for (const CheckResult& c : verify_checks(cfg)) {
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  " << c.detail << '\n';
    ok = ok && c.passed;
  }
  out << (ok ? "verify: all checks passed" : "verify: FAILED") << '\n';
  return ok;
}

void run_flops(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const double base =
      baseline_flops(cfg.cost, cfg.flops_epochs, cfg.dataset_size, cfg.n_rollouts);
  const double ours =
      lze_flops(cfg.cost, cfg.kappa, cfg.flops_epochs, cfg.dataset_size, cfg.n_rollouts);
  const double saved = savings_ratio(cfg.cost, cfg.kappa);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "per-token coefficient: baseline %.6g, selected %.6g (kappa %.4g)\n"
                "baseline FLOPs: %.6e\nselected FLOPs: %.6e\nsaved: %.2f%%\n",
                cfg.cost.c_infer + cfg.cost.c_optim, lze_coefficient(cfg.cost, cfg.kappa),
                cfg.kappa, base, ours, saved * 100.0);
  out << buf;
  // Machine-readable line in the Budget schema.
  const double volume = cfg.flops_epochs * static_cast<double>(cfg.dataset_size) *
                        static_cast<double>(cfg.n_rollouts) * cfg.cost.params *
                        cfg.cost.tokens_per_sample;
  metrics::BudgetLine line;
  line.report.inference_flops = cfg.cost.c_infer * volume;
  line.report.optimization_flops = cfg.kappa * cfg.cost.c_optim * volume;
  line.report.total = ours;
  line.report.savings_vs_baseline = saved;
  out << metrics::format(line) << '\n';
}

}  // namespace lze
