#include "heavytail/random.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "heavytail/parallel.hpp"

namespace ht {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double RandomStream::exponential() { return -std::log(uniform()); }

// Lemire's multiply-and-reject; unbiased and identical on every standard library.
std::uint64_t RandomStream::index(std::uint64_t n) {
  using wide = unsigned __int128;
  wide m = static_cast<wide>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<wide>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

unsigned default_workers() {
  if (const char* env = std::getenv("HTLAB_WORKERS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ht
