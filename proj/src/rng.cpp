#include "iidgan/rng.hpp"

#include <cmath>
#include <numbers>

namespace iidgan {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& w : s_) w = splitmix64(seed);
}

Rng Rng::from_state(const State& s) {
  Rng r;
  r.s_ = s;
  return r;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open0() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

std::array<double, 2> Rng::normal_pair() {
  const double u1 = uniform_open0();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(theta), radius * std::sin(theta)};
}

Rng Rng::split() { return Rng(next_u64()); }

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed;
  const std::uint64_t a = splitmix64(x);
  std::uint64_t y = stream ^ 0xd1b54a32d192ed03ULL;
  const std::uint64_t b = splitmix64(y);
  return Rng(a ^ rotl(b, 17));
}

}  // namespace iidgan
