#pragma once

#include <cstdint>
#include <random>

namespace ht {

// Seed of the i-th child stream of `base`. Stable across platforms and
// thread counts; two levels of splitting compose as substream_seed(substream_seed(b, i), j).
std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) noexcept;

class RandomStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential();
  // Uniform index in [0, n), n > 0.
  std::uint64_t index(std::uint64_t n);
  bool bernoulli_half() { return (engine_() >> 63) != 0; }

  RandomStream split(std::uint64_t index) { return RandomStream(substream_seed(engine_(), index)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ht
