#include "rscore/rng.hpp"

namespace rscore {
namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

Rng::Rng(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x5851F42D4C957F2DULL)), counter_(0) {}

Rng::result_type Rng::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

Rng Rng::split(std::uint64_t id) const noexcept {
  // Two rounds so that nearby ids under nearby keys do not collide.
  const std::uint64_t child = mix64(mix64(key_ ^ 0xD6E8FEB86659FD93ULL) + mix64(id + kGolden));
  return Rng(child, 0);
}

Rng Rng::split(std::string_view tag) const noexcept {
  // FNV-1a
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return split(h);
}

double Rng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace rscore
