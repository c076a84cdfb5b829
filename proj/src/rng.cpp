#include "lze/rng.hpp"

namespace lze {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

RandomStream RandomStream::derive(std::uint64_t seed, StreamTag tag,
                                  std::initializer_list<std::uint64_t> key) {
  std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(tag)));
  for (std::uint64_t k : key) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return RandomStream(h);
}

double RandomStream::uniform_open() {
  // 53 random bits, shifted by half an ulp so both endpoints are excluded.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::uint64_t RandomStream::index(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

double RandomStream::normal(double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  return dist(engine_);
}

}  // namespace lze
