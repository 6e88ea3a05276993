#include "prefgrad/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace prefgrad {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  // u1 in (0, 1] so the log is finite; u2 in [0, 1).
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  if (n == 1) return 0;
  // Reject below the largest multiple of n to keep the draw exactly uniform.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

RngStream StreamFamily::stream(std::uint64_t tag, std::uint64_t i,
                               std::uint64_t j) const {
  std::uint64_t s = master_;
  s = mix64(s ^ mix64(tag));
  s = mix64(s ^ mix64(i + 0x632BE59BD9B4E019ULL));
  s = mix64(s ^ mix64(j + 0x9E6C63D0876A9ULL));
  return RngStream(s);
}

}  // namespace prefgrad
