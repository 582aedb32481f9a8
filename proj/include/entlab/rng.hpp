#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace entlab {

/// Philox4x32-10 counter-based generator.
///
/// A generator is fully determined by a 64-bit key and a 64-bit block
/// index; draws within one generator advance a second 64-bit counter.
/// Two generators with different (key, block) pairs produce independent
/// streams, which is what makes chunked Monte Carlo loops reproducible
/// regardless of how chunks are assigned to workers.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t key, std::uint64_t block) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1); never returns 0, so safe under log().
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, second variate cached).
  double normal() noexcept;
  /// Exponential with rate 1.
  double exponential() noexcept;
  /// Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang).
  double gamma(double shape) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Names an independent random stream: a user seed plus a stream id.
///
/// `engine(i)` yields the generator for chunk `i` of a loop; `child(tag)`
/// derives a sub-stream for a nested computation.
class RandomStream {
 public:
  constexpr RandomStream() = default;
  explicit constexpr RandomStream(std::uint64_t seed, std::uint64_t id = 0) : seed_(seed), id_(id) {}

  [[nodiscard]] Rng engine(std::uint64_t chunk = 0) const noexcept;
  [[nodiscard]] RandomStream child(std::uint64_t tag) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t id() const noexcept { return id_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t id_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace entlab
