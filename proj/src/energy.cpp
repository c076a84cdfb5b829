#include "lze/energy.hpp"

#include <cmath>
#include <string>

#include "lze/error.hpp"

namespace lze {

namespace {

void check_decay(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw Error(ErrorCode::InvalidDecay, "EMA decay must lie in (0,1)");
}

void check_history(std::span<const double> history) {
  if (history.empty()) throw Error(ErrorCode::EmptyHistory, "pass-rate history is empty");
}

}  // namespace

void validate(const RolloutGroup& group) {
  if (group.rewards.empty())
    throw Error(ErrorCode::EmptyGroup,
                "rollout group for prompt " + std::to_string(group.prompt.value) + " is empty");
  for (std::uint8_t r : group.rewards)
    if (r > 1)
      throw Error(ErrorCode::InvalidInputs,
                  "reward for prompt " + std::to_string(group.prompt.value) + " is not 0/1");
}

double pass_rate(const RolloutGroup& group) {
  validate(group);
  std::size_t ones = 0;
  for (std::uint8_t r : group.rewards) ones += r;
  return static_cast<double>(ones) / static_cast<double>(group.rewards.size());
}

double uncertainty(double p) {
  if (!is_probability(p)) throw Error(ErrorCode::InvalidProbability, "p outside [0,1]");
  return 4.0 * p * (1.0 - p);
}

double energy_score(const EnergyInputs& in) { return energy_score(in, ScoreFactors{}); }

double energy_score(const EnergyInputs& in, const ScoreFactors& factors) {
  if (!is_probability(in.d0) || !is_probability(in.pass_rate) ||
      !(in.momentum >= -1.0 && in.momentum <= 1.0) || !(in.alpha >= 0.0 && in.alpha < 1.0))
    throw Error(ErrorCode::InvalidInputs, "energy inputs out of range");
  const double anchor = factors.difficulty ? in.d0 : 1.0;
  const double unc = factors.uncertainty ? 4.0 * in.pass_rate * (1.0 - in.pass_rate) : 1.0;
  const double mom = factors.momentum ? 1.0 + in.alpha * in.momentum : 1.0;
  return anchor * unc * mom;
}

std::vector<double> ema_kernel_weights(std::size_t t, double lambda) {
  check_decay(lambda);
  std::vector<double> w(t + 1);
  double lam_pow = 1.0;
  for (std::size_t tau = 0; tau < t; ++tau) {
    w[tau] = (1.0 - lambda) * lam_pow;
    lam_pow *= lambda;
  }
  w[t] = lam_pow;
  return w;
}

double ema_kernel_convolve(std::span<const double> history, double lambda) {
  check_history(history);
  check_decay(lambda);
  const std::size_t t = history.size() - 1;
  double acc = 0.0;
  double lam_pow = 1.0;
  for (std::size_t tau = 0; tau < t; ++tau) {
    acc += (1.0 - lambda) * lam_pow * history[t - tau];
    lam_pow *= lambda;
  }
  return acc + lam_pow * history[0];
}

double truncated_kernel_convolve(std::span<const double> history, double lambda) {
  check_history(history);
  check_decay(lambda);
  const std::size_t t = history.size() - 1;
  double acc = 0.0;
  double lam_pow = 1.0;
  for (std::size_t tau = 0; tau <= t; ++tau) {
    acc += (1.0 - lambda) * lam_pow * history[t - tau];
    lam_pow *= lambda;
  }
  return acc;
}

double momentum_from_history(std::span<const double> history, double lambda) {
  if (history.size() < 2)
    throw Error(ErrorCode::InsufficientHistory, "momentum needs at least two pass rates");
  return history.back() - ema_kernel_convolve(history.first(history.size() - 1), lambda);
}

}  // namespace lze
