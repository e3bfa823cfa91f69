#include "doctest.h"
#include "medsched/baseline.hpp"
#include "medsched/engine.hpp"
#include "medsched/generate.hpp"

using namespace medsched;

TEST_CASE("SplitMix64 reference outputs") {
  SplitMix64 a(0);
  CHECK(a.next() == 0xe220a8397b1dcdafULL);
  CHECK(a.next() == 0x6e789e6aa1b965f4ULL);
  CHECK(a.next() == 0x06c45d188009454fULL);
  SplitMix64 b(1234567);
  CHECK(b.next() == 0x599ed017fb08fc85ULL);
}

TEST_CASE("uniform stays in range and hits both ends") {
  SplitMix64 r(42);
  bool lo = false, hi = false;
  for (int i = 0; i < 2000; ++i) {
    int x = r.uniform(-3, 4);
    CHECK(x >= -3);
    CHECK(x <= 4);
    lo |= x == -3;
    hi |= x == 4;
  }
  CHECK(lo);
  CHECK(hi);
  CHECK(r.uniform(5, 5) == 5);
}

TEST_CASE("same parameters give the same instance") {
  CtsGenParams c;
  c.seed = 99;
  CHECK(generate_cts(c) == generate_cts(c));
  OrsGenParams o;
  o.seed = 99;
  CHECK(generate_ors(o) == generate_ors(o));
  PoacGenParams q;
  q.seed = 99;
  CHECK(generate_poac(q) == generate_poac(q));
  c.seed = 100;
  CHECK_FALSE(generate_cts(c) == generate_cts(CtsGenParams{.seed = 99}));
}

TEST_CASE("tightness lands within ten percent") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    for (double t : {0.5, 1.0, 2.5}) {
      CtsGenParams c;
      c.seed = seed;
      c.patients = 40;
      c.tightness = t;
      CHECK(std::abs(cts_tightness(generate_cts(c)) - t) <= 0.1 * t);
      OrsGenParams o;
      o.seed = seed;
      o.registrations = 40;
      o.tightness = t;
      CHECK(std::abs(ors_tightness(generate_ors(o)) - t) <= 0.1 * t);
    }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PoacGenParams q;
    q.seed = seed;
    q.patients = 30;
    q.tightness = 0.5;
    CHECK(std::abs(poac_tightness(generate_poac(q)) - 0.5) <= 0.05);
  }
}

TEST_CASE("impossible knobs are rejected") {
  CHECK_THROWS_AS(generate_cts(CtsGenParams{.tightness = 0}), GeneratorError);
  CHECK_THROWS_AS(generate_cts(CtsGenParams{.slots = 3}), GeneratorError);
  CHECK_THROWS_AS(generate_cts(CtsGenParams{.bed_percent = 120}), GeneratorError);
  CHECK_THROWS_AS(generate_cts(CtsGenParams{.patients = 3, .tightness = 2.5}), GeneratorError);
  CHECK_THROWS_AS(generate_ors(OrsGenParams{.min_duration = 50, .max_duration = 40}), GeneratorError);
  CHECK_THROWS_AS(generate_ors(OrsGenParams{.units = 0}), GeneratorError);
  CHECK_THROWS_AS(generate_ors(OrsGenParams{.p1_percent = 60, .p2_percent = 50}), GeneratorError);
  CHECK_THROWS_AS(generate_poac(PoacGenParams{.patients = 2, .days = 5, .tightness = 3}), GeneratorError);
}

TEST_CASE("loose CTS instances satisfy the capacity witness") {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CtsGenParams c;
    c.seed = seed;
    c.patients = 20;
    c.tightness = 0.5;
    ok += cts_capacity_witness(generate_cts(c));
  }
  CHECK(ok >= 18);
}

TEST_CASE("overloaded ORS instances leave work unassigned") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    OrsGenParams o;
    o.seed = seed;
    o.registrations = 8;
    o.tightness = 1.5;
    o.p1_percent = 0;
    auto inst = generate_ors(o);
    auto out = solve(encode_ors(inst).model);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective->at_level(1) + out.objective->at_level(2) >= 1);
  }
}
