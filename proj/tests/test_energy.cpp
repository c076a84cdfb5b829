#include <doctest.h>

#include <cmath>
#include <vector>

#include "lze/energy.hpp"
#include "lze/error.hpp"
#include "lze/rng.hpp"

using namespace lze;

namespace {

// Oracle: run the recurrence directly, independent of the kernel code.
std::vector<double> recurrent_ema(const std::vector<double>& history, double lambda) {
  std::vector<double> mu{history[0]};
  for (std::size_t t = 1; t < history.size(); ++t)
    mu.push_back(lambda * mu.back() + (1.0 - lambda) * history[t]);
  return mu;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected lze::Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("pass_rate") {
  CHECK(pass_rate({PromptId{0}, {0, 0, 0, 0}}) == 0.0);
  CHECK(pass_rate({PromptId{0}, {1, 1, 1, 1, 1, 1, 1, 1}}) == 1.0);
  CHECK(pass_rate({PromptId{0}, {1, 0, 1, 1, 0, 1, 0, 1}}) == 0.625);
  CHECK(code_of([] { pass_rate({PromptId{0}, {}}); }) == ErrorCode::EmptyGroup);
  CHECK(code_of([] { pass_rate({PromptId{0}, {1, 2}}); }) == ErrorCode::InvalidInputs);
}

TEST_CASE("uncertainty") {
  CHECK(uncertainty(0.5) == 1.0);
  CHECK(uncertainty(0.0) == 0.0);
  CHECK(uncertainty(1.0) == 0.0);
  CHECK(uncertainty(0.25) == 0.75);
  CHECK(code_of([] { uncertainty(1.5); }) == ErrorCode::InvalidProbability);

  // Symmetry and maximum on a fine grid of dyadic points (exact in binary).
  for (int i = 0; i <= 1024; ++i) {
    const double p = i / 1024.0;
    CHECK(uncertainty(p) == uncertainty(1.0 - p));
    CHECK(uncertainty(p) <= uncertainty(0.5));
  }
}

TEST_CASE("energy_score examples") {
  for (double d0 : {0.0, 0.3, 1.0})
    for (double m : {-1.0, 0.0, 0.7})
      CHECK(energy_score({d0, 1.0, m, 0.3}) == 0.0);
  CHECK(energy_score({0.0, 0.5, 0.5, 0.3}) == 0.0);
  CHECK(energy_score({0.6, 0.5, 0.1, 0.3}) == doctest::Approx(0.618).epsilon(1e-15));

  CHECK(code_of([] { energy_score({1.1, 0.5, 0.0, 0.3}); }) == ErrorCode::InvalidInputs);
  CHECK(code_of([] { energy_score({0.5, 0.5, 1.5, 0.3}); }) == ErrorCode::InvalidInputs);
  CHECK(code_of([] { energy_score({0.5, 0.5, 0.0, 1.0}); }) == ErrorCode::InvalidInputs);
}

TEST_CASE("energy_score factor ablation replaces a factor with 1") {
  const EnergyInputs in{0.6, 0.25, -0.5, 0.3};
  CHECK(energy_score(in, {false, true, true}) == doctest::Approx(0.75 * 0.85));
  CHECK(energy_score(in, {true, false, true}) == doctest::Approx(0.6 * 0.85));
  CHECK(energy_score(in, {true, true, false}) == doctest::Approx(0.6 * 0.75));
  CHECK(energy_score(in, {false, false, false}) == 1.0);
}

TEST_CASE("property: zero annihilation and monotone momentum") {
  auto rng = RandomStream::derive(7, StreamTag::Oracle, {200});
  for (int i = 0; i < 2000; ++i) {
    const double d0 = rng.uniform_open();
    const double p = rng.uniform_open();
    const double alpha = 0.999 * rng.uniform_open();
    const double m = 2.0 * rng.uniform_open() - 1.0;
    CHECK(energy_score({0.0, p, m, alpha}) == 0.0);
    CHECK(energy_score({d0, 0.0, m, alpha}) == 0.0);
    CHECK(energy_score({d0, 1.0, m, alpha}) == 0.0);
    CHECK(energy_score({d0, p, m, alpha}) >= 0.0);
    const double m2 = std::min(1.0, m + 0.01 + 0.5 * rng.uniform_open());
    if (m2 > m) CHECK(energy_score({d0, p, m2, alpha}) > energy_score({d0, p, m, alpha}));
  }
}

TEST_CASE("ema_kernel_convolve examples") {
  CHECK(ema_kernel_convolve(std::vector<double>{0.37}, 0.9) == 0.37);
  for (std::size_t len : {1u, 2u, 10u, 150u})
    CHECK(ema_kernel_convolve(std::vector<double>(len, 0.625), 0.9) ==
          doctest::Approx(0.625).epsilon(1e-14));
  CHECK(ema_kernel_convolve(std::vector<double>{0.2, 0.8}, 0.9) ==
        doctest::Approx(0.26).epsilon(1e-15));
  CHECK(code_of([] { ema_kernel_convolve(std::vector<double>{}, 0.9); }) ==
        ErrorCode::EmptyHistory);
  CHECK(code_of([] { ema_kernel_convolve(std::vector<double>{0.1}, 0.0); }) ==
        ErrorCode::InvalidDecay);
}

TEST_CASE("kernel weights sum to one; the untruncated kernel does not") {
  for (double lambda : {0.5, 0.9, 0.99})
    for (std::size_t t : {0u, 1u, 5u, 199u}) {
      const auto w = ema_kernel_weights(t, lambda);
      double sum = 0.0;
      for (double x : w) sum += x;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
      // 1 - lambda^(t+1)
      const std::vector<double> ones(t + 1, 1.0);
      CHECK(truncated_kernel_convolve(ones, lambda) ==
            doctest::Approx(1.0 - std::pow(lambda, static_cast<double>(t + 1))));
    }
}

TEST_CASE("momentum_from_history examples") {
  CHECK(momentum_from_history(std::vector<double>(12, 0.4), 0.9) ==
        doctest::Approx(0.0).epsilon(1e-14));
  for (double lambda : {0.1, 0.5, 0.9})
    CHECK(momentum_from_history(std::vector<double>{0.5, 0.7}, lambda) ==
          doctest::Approx(0.2).epsilon(1e-15));
  CHECK(momentum_from_history(std::vector<double>{0, 0, 0, 1}, 0.9) == 1.0);
  CHECK(code_of([] { momentum_from_history(std::vector<double>{0.5}, 0.9); }) ==
        ErrorCode::InsufficientHistory);
}

TEST_CASE("property: duality with the recurrence and with the pool") {
  for (double lambda : {0.5, 0.9, 0.99}) {
    for (std::uint64_t seq = 0; seq < 20; ++seq) {
      auto rng = RandomStream::derive(seq, StreamTag::Oracle, {201});
      std::vector<double> h;
      const std::size_t len = 1 + rng.index(200);
      for (std::size_t i = 0; i < len; ++i) h.push_back(rng.uniform_open());
      const auto mu = recurrent_ema(h, lambda);

      auto pool = PromptPool::initialize({{PromptId{0}, h[0]}}, {true});
      for (std::size_t t = 1; t < len; ++t) {
        const auto prefix = std::span<const double>(h).first(t + 1);
        CHECK(std::abs(ema_kernel_convolve(prefix, lambda) - mu[t]) <= 1e-12);
        const auto r = pool.apply_rollout_result(PromptId{0}, h[t], lambda);
        CHECK(std::abs(r.ema - mu[t]) <= 1e-12);
        CHECK(std::abs(r.momentum - momentum_from_history(prefix, lambda)) <= 1e-12);
      }
      CHECK(pool.history(PromptId{0}) == h);
    }
  }
}
