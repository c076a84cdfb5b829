#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "lze/error.hpp"
#include "lze/sim.hpp"

using namespace lze;
using namespace lze::sim;

namespace {

ToyPolicy random_policy(std::uint64_t seed, std::size_t prompts, std::size_t m, double spread) {
  auto rng = RandomStream::derive(seed, StreamTag::Oracle, {500});
  ToyPolicy policy(m);
  for (std::uint32_t i = 0; i < prompts; ++i) {
    std::vector<double> logits(m);
    for (double& x : logits) x = rng.normal(0.0, spread);
    policy.add_prompt(PromptId{i}, logits, rng.index(m));
  }
  return policy;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Numeric Hessian of the pass probability by second differences.
Eigen::MatrixXd numeric_hessian(const ToyPolicy& policy, PromptId id, double h) {
  const auto base = policy.logits(id);
  const auto m = static_cast<Eigen::Index>(base.size());
  Eigen::MatrixXd hess(m, m);
  auto p_at = [&](Eigen::Index i, double di, Eigen::Index j, double dj) {
    ToyPolicy q = policy;
    auto l = base;
    l[static_cast<std::size_t>(i)] += di;
    l[static_cast<std::size_t>(j)] += dj;
    q.set_logits(id, l);
    return q.pass_probability(id);
  };
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      hess(i, j) = (p_at(i, h, j, h) - p_at(i, h, j, -h) - p_at(i, -h, j, h) +
                    p_at(i, -h, j, -h)) /
                   (4.0 * h * h);
  return hess;
}

}  // namespace

TEST_CASE("toy policy basics") {
  ToyPolicy policy(3);
  policy.add_prompt(PromptId{0}, {0.0, 0.0, 0.0}, 1);
  CHECK(policy.pass_probability(PromptId{0}) == doctest::Approx(1.0 / 3.0));
  CHECK(sum(policy.probabilities(PromptId{0})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(ToyPolicy(1), Error);
  CHECK_THROWS_AS(policy.add_prompt(PromptId{1}, {0.0}, 0), Error);
  CHECK_THROWS_AS(policy.pass_probability(PromptId{5}), Error);
  // Large logits do not overflow.
  policy.set_logits(PromptId{0}, {1000.0, 1000.0, -1000.0});
  CHECK(policy.pass_probability(PromptId{0}) == doctest::Approx(0.5));
}

TEST_CASE("rollout examples") {
  ToyPolicy policy(4);
  policy.add_prompt(PromptId{0}, {-1e9, 0.0, -1e9, -1e9}, 1);
  policy.add_prompt(PromptId{1}, {0.0, -1e9, 0.0, 0.0}, 1);
  policy.add_prompt(PromptId{2}, {0.0, 0.0, 0.0, 0.0}, 2);
  RandomStream rng(3);
  const auto all = rollout(policy, PromptId{0}, 8, rng);
  CHECK(all.group.rewards == std::vector<std::uint8_t>(8, 1));
  CHECK(all.answers == std::vector<std::size_t>(8, 1));
  CHECK(rollout(policy, PromptId{1}, 8, rng).group.rewards == std::vector<std::uint8_t>(8, 0));
  CHECK_THROWS_AS(rollout(policy, PromptId{7}, 8, rng), Error);

  const auto g = rollout(policy, PromptId{2}, 16, rng);
  for (std::size_t k = 0; k < 16; ++k) CHECK((g.answers[k] == 2) == (g.group.rewards[k] == 1));
}

TEST_CASE("rollout pass rate is unbiased: p=0.5, n=8, 1e5 groups") {
  ToyPolicy policy(2);
  policy.add_prompt(PromptId{0}, {0.3, 0.3}, 0);
  RandomStream rng(2024);
  const int groups = 100'000;
  double total = 0.0;
  for (int i = 0; i < groups; ++i) total += pass_rate(rollout(policy, PromptId{0}, 8, rng).group);
  const double se = 0.5 / std::sqrt(8.0 * groups);
  CHECK(std::abs(total / groups - 0.5) <= 3.0 * se);
}

TEST_CASE("group_advantages examples and zero sum") {
  CHECK(group_advantages({PromptId{0}, {1, 1, 1, 1}}) == std::vector<double>(4, 0.0));
  CHECK(group_advantages({PromptId{0}, {0, 0, 0, 0}}) == std::vector<double>(4, 0.0));
  CHECK(group_advantages({PromptId{0}, {1, 0, 1, 1}}) ==
        std::vector<double>{0.25, -0.75, 0.25, 0.25});
  CHECK_THROWS_AS(group_advantages({PromptId{0}, {}}), Error);

  auto rng = RandomStream::derive(1, StreamTag::Oracle, {501});
  for (int t = 0; t < 500; ++t) {
    // Power-of-two group sizes keep p and r - p dyadic, so the sum is exact.
    const std::size_t n = std::size_t{1} << rng.index(6);
    RolloutGroup g{PromptId{0}, {}};
    for (std::size_t k = 0; k < n; ++k) g.rewards.push_back(static_cast<std::uint8_t>(rng.index(2)));
    CHECK(sum(group_advantages(g)) == 0.0);
  }
}

TEST_CASE("grpo_step: extreme groups leave parameters bit-identical") {
  auto policy = random_policy(5, 3, 6, 1.0);
  const auto before = policy;
  RandomStream rng(1);
  std::vector<SampledGroup> groups;
  groups.push_back({{PromptId{0}, std::vector<std::uint8_t>(8, 1)},
                    std::vector<std::size_t>(8, policy.correct_index(PromptId{0}))});
  const std::size_t wrong = (policy.correct_index(PromptId{1}) + 1) % 6;
  groups.push_back({{PromptId{1}, std::vector<std::uint8_t>(8, 0)},
                    std::vector<std::size_t>(8, wrong)});
  const auto stats = grpo_step(policy, groups, {5.0, 0.2, 3});
  CHECK(stats.terms == 0);
  CHECK(policy == before);
}

TEST_CASE("grpo_step: one success in two samples raises the correct logit") {
  ToyPolicy policy(4);
  policy.add_prompt(PromptId{0}, {0.0, 0.0, 0.0, 0.0}, 2);
  const double before = policy.logits(PromptId{0})[2];
  std::vector<SampledGroup> groups{{{PromptId{0}, {1, 0}}, {2, 0}}};
  grpo_step(policy, groups, {0.1, 0.2, 1});
  CHECK(policy.logits(PromptId{0})[2] > before);
  CHECK(policy.pass_probability(PromptId{0}) > 0.25);
}

TEST_CASE("grpo_step: unselected prompts are untouched, updates match REINFORCE") {
  auto policy = random_policy(8, 5, 5, 1.0);
  const auto before = policy;
  RandomStream rng(17);
  std::vector<SampledGroup> groups;
  for (std::uint32_t id : {1u, 3u}) {
    SampledGroup g;
    do g = rollout(policy, PromptId{id}, 8, rng);
    while (pass_rate(g.group) == 0.0 || pass_rate(g.group) == 1.0);
    groups.push_back(g);
  }
  const double lr = 0.7;
  const auto stats = grpo_step(policy, groups, {lr, 0.2, 1});
  CHECK(stats.clipped_terms == 0);
  CHECK(stats.max_ratio_deviation == 0.0);

  for (std::uint32_t id : {0u, 2u, 4u}) CHECK(policy.logits(PromptId{id}) == before.logits(PromptId{id}));

  // Oracle: (lr/n) sum_k A_k (e_{y_k} - pi), computed from scratch.
  for (const auto& g : groups) {
    const auto pi = softmax(before.logits(g.group.prompt));
    const double p = pass_rate(g.group);
    const double n = static_cast<double>(g.answers.size());
    std::vector<double> expect = before.logits(g.group.prompt);
    std::vector<double> step(pi.size(), 0.0);
    for (std::size_t k = 0; k < g.answers.size(); ++k) {
      const double a = g.group.rewards[k] - p;
      for (std::size_t j = 0; j < pi.size(); ++j)
        step[j] += a * ((j == g.answers[k] ? 1.0 : 0.0) - pi[j]) / n;
    }
    const auto& got = policy.logits(g.group.prompt);
    for (std::size_t j = 0; j < pi.size(); ++j)
      CHECK(got[j] == doctest::Approx(expect[j] + lr * step[j]).epsilon(1e-12));
    CHECK(sum(policy.probabilities(g.group.prompt)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("grpo_step: clipping activates with several inner epochs") {
  ToyPolicy policy(4);
  policy.add_prompt(PromptId{0}, {0.0, 0.0, 0.0, 0.0}, 0);
  std::vector<SampledGroup> groups{{{PromptId{0}, {1, 0, 0, 0}}, {0, 1, 2, 3}}};
  const auto stats = grpo_step(policy, groups, {4.0, 0.2, 6});
  CHECK(stats.max_ratio_deviation > 0.2);
  CHECK(stats.clipped_terms > 0);
  CHECK(sum(policy.probabilities(PromptId{0})) == doctest::Approx(1.0).epsilon(1e-12));

  ToyPolicy calm(4);
  calm.add_prompt(PromptId{0}, {0.0, 0.0, 0.0, 0.0}, 0);
  CHECK(grpo_step(calm, groups, {4.0, 0.2, 1}).clipped_terms == 0);
}

TEST_CASE("grpo_step: mismatched groups are rejected") {
  ToyPolicy policy(3);
  policy.add_prompt(PromptId{0}, {0.0, 0.0, 0.0}, 0);
  std::vector<SampledGroup> short_answers{{{PromptId{0}, {1, 0}}, {0}}};
  try {
    grpo_step(policy, short_answers, {});
    FAIL("expected MismatchedGroup");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MismatchedGroup);
  }
}

TEST_CASE("variance oracle examples") {
  RandomStream rng(0);
  const auto r = variance_oracle(0.5, 8, 1'000'000, rng);
  CHECK(r.predicted == 0.03125);
  CHECK(std::abs(r.empirical / r.predicted - 1.0) < 0.05);

  double best = 0.0, best_p = 0.0;
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    RandomStream g(1);
    const double pred = variance_oracle(p, 8, 10, g).predicted;
    if (pred > best) {
      best = pred;
      best_p = p;
    }
  }
  CHECK(best_p == 0.5);

  RandomStream g(2);
  CHECK(variance_oracle(1e-9, 8, 10, g).predicted < 1e-9);
  CHECK(variance_oracle(1.0 - 1e-9, 8, 10, g).predicted < 1e-9);
  CHECK_THROWS_AS(variance_oracle(0.0, 8, 10, g), Error);
  CHECK_THROWS_AS(variance_oracle(1.0, 8, 10, g), Error);
}

TEST_CASE("taylor_check examples") {
  auto policy = random_policy(21, 1, 6, 1.0);
  const PromptId id{0};
  const std::vector<double> zero(6, 0.0);
  const auto z = taylor_check(policy, id, zero);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);

  const auto grad = policy.pass_gradient(id);
  double gn = 0.0;
  for (double x : grad) gn += x * x;
  gn = std::sqrt(gn);
  std::vector<double> along(6);
  for (std::size_t j = 0; j < 6; ++j) along[j] = 1e-4 * grad[j] / gn;
  const auto a = taylor_check(policy, id, along);
  CHECK(a.lhs / a.rhs >= 1.0 - 1e-3);
  CHECK(a.lhs / a.rhs <= 1.0 + 1e-3);
  CHECK(a.remainder_ok);
  CHECK(a.cauchy_schwarz_ok);

  // Orthogonal to the gradient (and to the all-ones direction, which the
  // softmax ignores): first-order term is zero.
  std::vector<double> ortho{1.0, -1.0, 0.5, -0.5, 0.25, -0.25};
  double dot = 0.0;
  for (std::size_t j = 0; j < 6; ++j) dot += ortho[j] * grad[j];
  for (std::size_t j = 0; j < 6; ++j) ortho[j] -= dot * grad[j] / (gn * gn);
  double on = 0.0;
  for (double x : ortho) on += x * x;
  for (double& x : ortho) x *= 1e-3 / std::sqrt(on);
  const auto o = taylor_check(policy, id, ortho);
  CHECK(std::abs(o.rhs) < 1e-18);
  CHECK(std::abs(o.lhs) <= kSoftmaxRemainderConstant * 1e-6);

  // The remainder constant dominates half the Hessian's spectral norm.
  const Eigen::MatrixXd h = numeric_hessian(policy, id, 1e-4);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
  const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(0.5 * spectral <= kSoftmaxRemainderConstant);
  Eigen::VectorXd d(6);
  for (Eigen::Index j = 0; j < 6; ++j) d(j) = ortho[static_cast<std::size_t>(j)];
  CHECK(o.lhs == doctest::Approx(0.5 * d.dot(h * d)).epsilon(1e-3));

  CHECK_THROWS_AS(taylor_check(policy, PromptId{9}, zero), Error);
}

TEST_CASE("property: analytic gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto policy = random_policy(seed, 1, 2 + seed % 15, 1.5);
    const auto a = policy.pass_gradient(PromptId{0});
    const auto fd = finite_difference_gradient(policy, PromptId{0}, 1e-5);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      num += (a[j] - fd[j]) * (a[j] - fd[j]);
      den += a[j] * a[j];
    }
    CHECK(std::sqrt(num / den) <= 1e-6);
  }
}

TEST_CASE("learning experiment: zero learn rate gives a flat curve") {
  SimEnvConfig env;
  env.num_prompts = 16;
  env.learn_rate = 0.0;
  LoopParams p;
  p.strategy = Strategy::FullData;
  p.epochs = 10;
  const auto r = run_learning_experiment(env, p);
  REQUIRE(r.curve.size() > 1);
  for (const auto& pt : r.curve) CHECK(pt.mean_pass_rate == r.curve.front().mean_pass_rate);
  CHECK(r.curve.front().mean_pass_rate == make_policy(env).mean_pass_probability());
}

TEST_CASE("learning experiment: saturated pool") {
  SimEnvConfig env;
  env.num_prompts = 10;
  ToyPolicy policy(env.num_answers);
  for (std::uint32_t i = 0; i < env.num_prompts; ++i) {
    std::vector<double> logits(env.num_answers, -1e9);
    logits[i % env.num_answers] = 0.0;
    policy.add_prompt(PromptId{i}, logits, i % env.num_answers);
  }
  struct Counter : ExperimentObserver {
    std::vector<std::size_t> selected;
    void on_selection(const SelectionDecision& d) override { selected.push_back(d.selected.size()); }
  } counter;
  LoopParams p;
  p.epochs = 5;
  const auto r = run_learning_experiment(policy, env, p, &counter);
  for (const auto& pt : r.curve) CHECK(pt.mean_pass_rate == 1.0);
  CHECK(r.pool.pruned().size() == 10);
  CHECK(r.pool.active().empty());
  // Epoch 1 runs on the full pool; epoch 2 ends with every prompt pruned.
  REQUIRE(counter.selected.size() >= 2);
  CHECK(counter.selected[0] == 4);
  for (std::size_t i = 2; i < counter.selected.size(); ++i) CHECK(counter.selected[i] == 0);
  CHECK(r.policy == policy);
}

TEST_CASE("learning experiment: determinism and curve bookkeeping") {
  SimEnvConfig env;
  env.num_prompts = 24;
  env.seed = 9;
  LoopParams p;
  p.epochs = 12;
  p.batch_size = 8;
  const auto a = run_learning_experiment(env, p);
  const auto b = run_learning_experiment(env, p);
  CHECK(a.curve == b.curve);
  CHECK(a.policy == b.policy);
  CHECK(a.pool == b.pool);
  CHECK(a.ledger == b.ledger);
  for (std::size_t i = 1; i < a.curve.size(); ++i)
    CHECK(a.curve[i].gradient_samples >= a.curve[i - 1].gradient_samples);

  const std::vector<CurvePoint> curve{{0, 0, 0.2}, {1, 5, 0.5}, {2, 9, 0.91}, {3, 12, 0.95}};
  CHECK(samples_to_threshold(curve, 0.9) == 9u);
  CHECK(samples_to_threshold(curve, 0.99) == std::nullopt);
}

TEST_CASE("learning experiment: lze learns faster than uniform on a default seed") {
  SimEnvConfig env;
  env.seed = 3;
  LoopParams p;
  p.stop_at_pass_rate = 0.9;
  p.epochs = 400;
  const auto lze = run_learning_experiment(env, p);
  p.strategy = Strategy::Uniform;
  const auto uni = run_learning_experiment(env, p);
  const auto a = samples_to_threshold(lze.curve, 0.9);
  const auto b = samples_to_threshold(uni.curve, 0.9);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(*a < *b);
}
