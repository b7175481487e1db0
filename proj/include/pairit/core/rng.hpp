#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace pairit {

// Seeded stream with platform-independent draws: std distributions are
// implementation-defined, so every conversion from raw 64-bit output is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1) with 53 bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform in [0, n) by rejection.
  std::uint64_t index(std::uint64_t n);

  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  // Independent child stream, e.g. one per simulated session.
  Rng split(std::uint64_t stream) const;

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;

};

}  // namespace pairit
