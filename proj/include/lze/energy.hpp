#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lze/pool.hpp"

namespace lze {

// n binary verifier outcomes for one prompt at one step.
struct RolloutGroup {
  PromptId prompt;
  std::vector<std::uint8_t> rewards;

  friend bool operator==(const RolloutGroup&, const RolloutGroup&) = default;
};

// Throws EmptyGroup / InvalidInputs (non-binary reward).
void validate(const RolloutGroup& group);

double pass_rate(const RolloutGroup& group);

// Normalized Bernoulli variance 4p(1-p).
double uncertainty(double p);

struct EnergyInputs {
  double d0 = 0.0;
  double pass_rate = 0.0;
  double momentum = 0.0;
  double alpha = 0.3;
};

// Which multiplicative factors enter the score. A disabled factor is
// replaced by 1; used for component ablations.
struct ScoreFactors {
  bool difficulty = true;
  bool uncertainty = true;
  bool momentum = true;

  friend bool operator==(const ScoreFactors&, const ScoreFactors&) = default;
};

// d0 * 4p(1-p) * (1 + alpha*m). Requires alpha in [0,1) so the score is
// non-negative.
double energy_score(const EnergyInputs& in);
double energy_score(const EnergyInputs& in, const ScoreFactors& factors);

// Closed-form unroll of mu(t) = lambda*mu(t-1) + (1-lambda)*p(t) with
// mu(0) = p(0):
//   sum_{tau<t} (1-lambda) lambda^tau p(t-tau) + lambda^t p(0).
double ema_kernel_convolve(std::span<const double> history, double lambda);

// Weights of the above, indexed by lag tau = 0..t. Sums to 1.
std::vector<double> ema_kernel_weights(std::size_t t, double lambda);

// The untruncated kernel (1-lambda) lambda^tau applied for tau = 0..t with no
// boundary correction. Its weights sum to 1 - lambda^(t+1); kept only so the
// verifier can report how far it is from the recurrence.
double truncated_kernel_convolve(std::span<const double> history, double lambda);

// p(t) - mu(t-1): the high-pass residual of the last sample.
double momentum_from_history(std::span<const double> history, double lambda);

}  // namespace lze
