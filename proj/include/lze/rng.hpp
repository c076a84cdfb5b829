#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lze {

// Purpose tags mixed into substream keys so that, e.g., the rollout stream of
// prompt 3 at step 7 never aliases the selection stream of step 7.
enum class StreamTag : std::uint64_t {
  InitPolicy = 1,
  InitRollout = 2,
  Rollout = 3,
  Selection = 4,
  UniformSelection = 5,
  Replay = 6,
  ReplayRollout = 7,
  Oracle = 8,
  Minibatch = 9,
};

// Deterministic random stream. Substreams are keyed by (run seed, tag, ...)
// so a draw never depends on how many other draws happened before it.
class RandomStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed);

  static RandomStream derive(std::uint64_t seed, StreamTag tag,
                             std::initializer_list<std::uint64_t> key = {});

  // Uniform on the open interval (0,1); never returns an exact endpoint.
  double uniform_open();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

  double normal(double mean = 0.0, double stddev = 1.0);

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
};

// SplitMix64 finalizer; used to fold substream keys into a seed.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace lze
