#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ecx/generator.hpp"
#include "ecx/oracle.hpp"
#include "fixtures.hpp"

using namespace ecx;

TEST_CASE("exhaustive extraction search on the square-root graph") {
  EGraph g = fixtures::square_root();

  OracleResult acyc = brute_force_extract(g, true);
  REQUIRE(acyc.optimum);
  CHECK(*acyc.optimum == 2.0);
  REQUIRE(acyc.witnesses.size() == 1);
  CHECK(acyc.witnesses[0].choice == fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}}).choice);
  for (const auto& w : acyc.witnesses) {
    auto v = validate_extraction(g, w);
    CHECK(v.is_extraction);
    CHECK(v.is_satisfying);
    CHECK(v.is_acyclic);
    CHECK(v.is_minimal);
  }

  // Without the acyclicity filter the cyclic plus/zero choice ties at 2.
  OracleResult any = brute_force_extract(g, false);
  REQUIRE(any.optimum);
  CHECK(*any.optimum == 2.0);
  CHECK(any.witnesses.size() == 2);
}

TEST_CASE("listing every minimal extraction") {
  EGraph g = fixtures::square_root();
  auto strict = enumerate_minimal_extractions(g, true);
  REQUIRE(strict.size() == 1);
  CHECK(strict[0].choice == fixtures::choose(g, {{"A", "sqrt"}, {"B", "two"}}).choice);
  // Dropping the filter admits the cyclic plus/zero support as well.
  CHECK(enumerate_minimal_extractions(g, false).size() == 2);
}

TEST_CASE("a graph whose only support is cyclic") {
  EGraph g = fixtures::plus_only();
  CHECK(!brute_force_extract(g, true).optimum);
  OracleResult any = brute_force_extract(g, false);
  REQUIRE(any.optimum);
  CHECK(*any.optimum == 2.0);
}

TEST_CASE("acyclicity can cost real money") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    EGraph g = cyclic_cheapest_egraph(rng);
    OracleResult strict = brute_force_extract(g, true);
    OracleResult loose = brute_force_extract(g, false);
    REQUIRE(loose.optimum);
    if (strict.optimum) CHECK(*loose.optimum <= *strict.optimum);
  }
}

TEST_CASE("parallel enumeration matches the serial pass") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 25; ++i) {
    EGraph g = random_egraph(rng);
    for (bool acyc : {true, false}) {
      OracleResult a = brute_force_extract(g, acyc, false);
      OracleResult b = brute_force_extract(g, acyc, true);
      CHECK(a.optimum == b.optimum);
      CHECK(a.count_satisfying == b.count_satisfying);
      REQUIRE(a.witnesses.size() == b.witnesses.size());
      for (std::size_t k = 0; k < a.witnesses.size(); ++k) {
        CHECK(a.witnesses[k].choice == b.witnesses[k].choice);
      }
    }
  }
}

TEST_CASE("the search space guard trips on oversized instances") {
  CHECK_THROWS_AS(brute_force_extract(chain_egraph(24), true), InstanceTooLarge);
}

TEST_CASE("exhaustive circuit search agrees with the extraction view") {
  EGraph g = fixtures::square_root();
  auto [c, m] = egraph_to_circuit(g);
  CircuitOracleResult r = brute_force_circuit(c, true);
  REQUIRE(r.optimum);
  CHECK(*r.optimum == 2.0);
  for (const auto& w : r.witnesses) {
    CHECK(is_valid_evaluation(c, w));
    CHECK(is_satisfying(c, w));
    CHECK(is_acyclic_evaluation(c, w));
  }
}

TEST_CASE("cyclic assignments are only found by the full sweep") {
  fixtures::CheapCycle f = fixtures::cheap_cycle_circuit();
  CircuitOracleResult strict = brute_force_circuit(f.circuit, true);
  REQUIRE(strict.optimum);
  CHECK(*strict.optimum == 10.0);  // x_a plus y
  CircuitOracleResult loose = brute_force_circuit(f.circuit, false);
  REQUIRE(loose.optimum);
  CHECK(*loose.optimum == 1.0);  // the a<->b cluster needs only y

  fixtures::CrossCycle x = fixtures::cross_cycle_circuit();
  CHECK(*brute_force_circuit(x.circuit, true).optimum == 6.0);
  CHECK(*brute_force_circuit(x.circuit, false).optimum == 2.0);
}

TEST_CASE("minimality predicate matches literal subset enumeration") {
  std::mt19937_64 rng(5);
  CircuitGenOptions opts;
  opts.max_vertices = 10;
  int evaluations_checked = 0;
  for (int i = 0; i < 40; ++i) {
    Circuit c = random_circuit(rng, opts);
    const std::uint32_t n = static_cast<std::uint32_t>(c.num_vertices());
    for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << n); ++bits) {
      Evaluation a;
      a.value.resize(n);
      for (std::uint32_t v = 0; v < n; ++v) a.value[v] = (bits >> v) & 1;
      if (!is_valid_evaluation(c, a) || !is_satisfying(c, a)) continue;
      ++evaluations_checked;
      CHECK(is_minimal(c, a) == brute_force_is_minimal(c, a));
    }
  }
  CHECK(evaluations_checked > 100);  // the corpus actually exercised the predicate
}

TEST_CASE("enumerated minimal evaluations are exactly the minimal ones") {
  std::mt19937_64 rng(6);
  CircuitGenOptions opts;
  opts.max_vertices = 9;
  for (int i = 0; i < 20; ++i) {
    Circuit c = random_circuit(rng, opts);
    for (bool acyc : {true, false}) {
      auto evs = enumerate_minimal_evaluations(c, acyc);
      for (const auto& a : evs) {
        CHECK(is_valid_evaluation(c, a));
        CHECK(is_satisfying(c, a));
        CHECK(brute_force_is_minimal(c, a));
        if (acyc) CHECK(is_acyclic_evaluation(c, a));
      }
    }
  }
}
