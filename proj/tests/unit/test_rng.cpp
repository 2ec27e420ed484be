#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "iidgan/rng.hpp"

using namespace iidgan;

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("state round-trip resumes the stream") {
  Rng a(7);
  for (int i = 0; i < 10; ++i) a.next_u64();
  Rng b = Rng::from_state(a.state());
  for (int i = 0; i < 100; ++i) CHECK(a.normal_pair() == b.normal_pair());
}

TEST_CASE("uniform ranges") {
  Rng r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    const double v = r.uniform_open0();
    CHECK_UNARY(v > 0.0);
    CHECK_UNARY(v <= 1.0);
    CHECK_UNARY(r.below(7) < 7);
  }
}

TEST_CASE("below is unbiased over small bounds") {
  Rng r(9);
  std::vector<int> counts(8, 0);
  const int n = 80000;
  for (int i = 0; i < n; ++i) ++counts[r.below(8)];
  // Each count is Binomial(n, 1/8): sd ≈ 93.5; 5 sd bound.
  for (int c : counts) CHECK(std::abs(c - n / 8) < 470);
}

TEST_CASE("normal moments") {
  Rng r(2);
  const int n = 200000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n / 2; ++i) {
    for (double z : r.normal_pair()) {
      s += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
  }
  CHECK(std::abs(s / n) < 0.012);          // se ≈ 0.0022
  CHECK(std::abs(s2 / n - 1.0) < 0.016);   // se ≈ 0.0032
  CHECK(std::abs(s4 / n - 3.0) < 0.1);     // se ≈ 0.022
}

TEST_CASE("derived and split streams are distinct") {
  std::set<std::uint64_t> first;
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (std::uint64_t stream = 0; stream < 4; ++stream)
      first.insert(Rng::derive(seed, stream).next_u64());
  CHECK(first.size() == 16);
  CHECK(Rng::derive(3, 1) == Rng::derive(3, 1));
  Rng p(5);
  Rng copy = p;
  Rng child = p.split();
  CHECK_FALSE(p == copy);
  CHECK_FALSE(child == p);
}
