#pragma once

#include <cstdint>
#include <random>

namespace prefgrad {

/// SplitMix64 finalizer. Used to derive substream seeds from a master seed.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic random stream. The engine (mt19937_64) has a fully
/// standardized output sequence, and all transforms below are pinned by this
/// implementation rather than delegated to std distributions, whose output is
/// implementation-defined. Identical seed, identical call sequence: identical
/// values.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01();

  /// Standard normal via Box-Muller. Stateless across calls: each call
  /// consumes exactly two engine outputs.
  double normal();

  /// Uniform integer in [0, n). Rejection sampling, exactly uniform.
  /// n == 1 consumes no engine output. n == 0 is invalid.
  std::uint64_t uniform_below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Named substreams derived from one master seed. A stream's identity is the
/// triple (tag, i, j); equal identities yield bitwise-identical streams, and
/// distinct identities are decorrelated by the mixing function. This is what
/// makes runs reproducible while keeping per-pair randomness independent of
/// evaluation order.
class StreamFamily {
 public:
  explicit StreamFamily(std::uint64_t master) : master_(master) {}

  RngStream stream(std::uint64_t tag, std::uint64_t i = 0,
                   std::uint64_t j = 0) const;

  std::uint64_t master() const { return master_; }

 private:
  std::uint64_t master_;
};

// Stream tags used by the optimizers and the experiment runner.
namespace streams {
inline constexpr std::uint64_t kDirection = 1;           // per iteration t
inline constexpr std::uint64_t kTrajectoryBase = 2;      // per (t, pair n)
inline constexpr std::uint64_t kTrajectoryPerturbed = 3; // per (t, pair n)
inline constexpr std::uint64_t kFeedback = 4;            // per (t, pair n)
inline constexpr std::uint64_t kIterateSelect = 5;       // once per run
inline constexpr std::uint64_t kDiagnostics = 6;         // per check item
}  // namespace streams

}  // namespace prefgrad
