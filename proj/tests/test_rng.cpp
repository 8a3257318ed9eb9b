#include <cstdint>
#include <vector>

#include "cppso/rng.hpp"
#include "doctest.h"

using namespace cppso;

TEST_CASE("identical key chains give identical streams") {
  RngStream a = KeyChain(7).with(1).with(42).stream();
  RngStream b = KeyChain(7).with(1).with(42).stream();
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different links give different streams") {
  KeyChain root(7);
  CHECK(root.with(1).key() != root.with(2).key());
  CHECK(root.with(1).with(2).key() != root.with(2).with(1).key());
  CHECK(KeyChain(7).key() != KeyChain(8).key());
}

TEST_CASE("doubles are uniform on [0,1)") {
  RngStream r = KeyChain(123).with(9).stream();
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = r.next_double();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("next_below covers its range evenly") {
  RngStream r = KeyChain(5).with(3).stream();
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    std::uint32_t v = r.next_below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) {
    CHECK(h > 800);
    CHECK(h < 1200);
  }
}
