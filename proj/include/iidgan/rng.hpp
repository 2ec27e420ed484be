#pragma once

#include <array>
#include <cstdint>

namespace iidgan {

/// xoshiro256** generator seeded through SplitMix64. The full state is four
/// words, so it checkpoints exactly. Gaussian draws use Box–Muller with no
/// cached spare; a draw consumes exactly two uniforms per pair.
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  static Rng from_state(const State& s);
  const State& state() const { return s_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on (0, 1], safe as a log argument.
  double uniform_open0();

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Two independent N(0, 1) draws.
  std::array<double, 2> normal_pair();

  /// Independent child stream. The parent advances by one draw.
  Rng split();

  /// Deterministic stream derived from (seed, stream) without touching any
  /// existing generator.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  bool operator==(const Rng&) const = default;

 private:
  State s_{};
};

}  // namespace iidgan
