#include <cmath>
#include <algorithm>
#include <limits>
#include <numeric>

#include "lze/error.hpp"
#include "lze/sim.hpp"

namespace lze::sim {

namespace {

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

VarianceReport variance_oracle(double p, std::size_t n, std::uint64_t num_trials,
                               RandomStream& rng, double score_sq_norm) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorCode::InvalidProbability, "variance oracle needs p in (0,1)");
  if (n == 0 || num_trials < 2 || !(score_sq_norm > 0.0))
    throw Error(ErrorCode::InvalidParams, "variance oracle needs n >= 1, trials >= 2, G > 0");

  const double scale = std::sqrt(score_sq_norm);
  const double inv_n = 1.0 / static_cast<double>(n);
  // Score vectors live in R^2: success rollouts along e0, failures along e1,
  // each with a fair random sign.
  double sum[2] = {0.0, 0.0};
  double sum_sq = 0.0;
  for (std::uint64_t trial = 0; trial < num_trials; ++trial) {
    double g[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      const bool success = rng.uniform_open() < p;
      const double sign = rng.uniform_open() < 0.5 ? -1.0 : 1.0;
      const double adv = (success ? 1.0 : 0.0) - p;
      g[success ? 0 : 1] += adv * sign * scale;
    }
    g[0] *= inv_n;
    g[1] *= inv_n;
    sum[0] += g[0];
    sum[1] += g[1];
    sum_sq += g[0] * g[0] + g[1] * g[1];
  }
  const double t = static_cast<double>(num_trials);
  const double mean_sq = (sum[0] * sum[0] + sum[1] * sum[1]) / (t * t);
  VarianceReport out;
  // Unbiased sample covariance trace.
  out.empirical = (sum_sq / t - mean_sq) * t / (t - 1.0);
  out.predicted = p * (1.0 - p) * score_sq_norm * inv_n;
  return out;
}

SoftmaxVarianceReport softmax_variance_report(const ToyPolicy& policy, PromptId id,
                                              std::size_t n, std::uint64_t num_trials,
                                              RandomStream& rng) {
  if (n == 0 || num_trials < 2)
    throw Error(ErrorCode::InvalidParams, "softmax variance report needs n >= 1, trials >= 2");
  const std::vector<double> pi = policy.probabilities(id);
  const std::size_t c = policy.correct_index(id);
  const std::size_t m = pi.size();
  const double p = pi[c];

  // ||grad log pi(y)||^2 = ||e_y - pi||^2 = 1 - 2 pi_y + sum pi^2
  const double pi_sq = std::inner_product(pi.begin(), pi.end(), pi.begin(), 0.0);
  double g_mean = 0.0;
  double weighted = 0.0;
  for (std::size_t y = 0; y < m; ++y) {
    const double s2 = 1.0 - 2.0 * pi[y] + pi_sq;
    const double a = (y == c ? 1.0 : 0.0) - p;
    g_mean += pi[y] * s2;
    weighted += pi[y] * a * a * s2;
  }
  const std::vector<double> grad = policy.pass_gradient(id);
  const double grad_sq = std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0);

  SoftmaxVarianceReport out;
  out.p = p;
  out.grad_norm_sq = grad_sq;
  out.predicted = p * (1.0 - p) * g_mean / static_cast<double>(n);
  out.exact = (weighted - grad_sq) / static_cast<double>(n);

  std::vector<double> cdf(m);
  std::partial_sum(pi.begin(), pi.end(), cdf.begin());
  std::vector<double> sum(m, 0.0);
  std::vector<double> g(m);
  double sum_sq = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::uint64_t trial = 0; trial < num_trials; ++trial) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = rng.uniform_open() * cdf.back();
      std::size_t y = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                               cdf.begin());
      y = std::min(y, m - 1);
      const double a = (y == c ? 1.0 : 0.0) - p;
      for (std::size_t j = 0; j < m; ++j) g[j] += a * ((j == y ? 1.0 : 0.0) - pi[j]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      g[j] *= inv_n;
      sum[j] += g[j];
      sum_sq += g[j] * g[j];
    }
  }
  const double t = static_cast<double>(num_trials);
  double mean_sq = 0.0;
  for (double s : sum) mean_sq += (s / t) * (s / t);
  out.empirical = (sum_sq / t - mean_sq) * t / (t - 1.0);
  return out;
}

TaylorReport taylor_check(const ToyPolicy& policy, PromptId id, std::span<const double> delta) {
  const std::vector<double>& theta = policy.logits(id);
  if (delta.size() != theta.size())
    throw Error(ErrorCode::InvalidParams, "delta dimension must equal M");

  ToyPolicy moved(policy.num_answers());
  std::vector<double> shifted(theta);
  for (std::size_t j = 0; j < shifted.size(); ++j) shifted[j] += delta[j];
  moved.add_prompt(id, std::move(shifted), policy.correct_index(id));

  const std::vector<double> grad = policy.pass_gradient(id);
  TaylorReport r;
  r.lhs = moved.pass_probability(id) - policy.pass_probability(id);
  r.rhs = std::inner_product(grad.begin(), grad.end(), delta.begin(), 0.0);
  r.grad_norm = norm(grad);
  r.delta_norm = norm(delta);
  r.remainder_bound = kSoftmaxRemainderConstant * r.delta_norm * r.delta_norm;
  // A few ulps of slack for the subtraction in lhs.
  const double slack = 8.0 * std::numeric_limits<double>::epsilon();
  r.remainder_ok = std::abs(r.lhs - r.rhs) <= r.remainder_bound + slack;
  r.cauchy_schwarz_ok =
      std::abs(r.lhs) <= r.grad_norm * r.delta_norm + r.remainder_bound + slack;
  return r;
}

std::vector<double> finite_difference_gradient(const ToyPolicy& policy, PromptId id, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidParams, "finite-difference step must be > 0");
  const std::vector<double>& theta = policy.logits(id);
  const std::size_t c = policy.correct_index(id);
  std::vector<double> grad(theta.size());
  std::vector<double> probe(theta);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    probe[j] = theta[j] + h;
    const double up = softmax(probe)[c];
    probe[j] = theta[j] - h;
    const double down = softmax(probe)[c];
    probe[j] = theta[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace lze::sim
