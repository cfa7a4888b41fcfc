#include <doctest.h>

#include <random>

#include "mrp/lattice.hpp"
#include "test_util.hpp"

using namespace mrp;

TEST_CASE("default demographic lattice has 6528 cells") {
  LatticePtr lattice = default_demographic_lattice();
  CHECK(lattice->size() == 6528);
  CHECK(lattice->num_factors() == 5);
  CHECK(lattice->factor(0).levels.size() == 2);
  CHECK(lattice->factor(4).levels.size() == 51);
}

TEST_CASE("single factor lattice is the degenerate product") {
  std::vector<FactorSpec> factors{{"only", {"a", "b", "c"}}};
  CellLattice lattice(std::move(factors));
  CHECK(lattice.size() == 3);
}

TEST_CASE("row-major canonical position") {
  // factors of sizes (2, 3): key (1, 2) sits at 1*3 + 2 = 5
  LatticePtr lattice = test::tiny_lattice();
  CellKey key{1, 2};
  CHECK(lattice->position(key) == 5);
  CHECK(lattice->key_at(5) == key);
}

TEST_CASE("position/key is a bijection over the whole lattice") {
  LatticePtr lattice = test::tiny_lattice();
  for (std::size_t p = 0; p < lattice->size(); ++p) {
    CHECK(lattice->position(lattice->key_at(p)) == p);
  }
  // spot-check the full-size lattice too
  LatticePtr big = default_demographic_lattice();
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::size_t p = rng() % big->size();
    CHECK(big->position(big->key_at(p)) == p);
  }
}

TEST_CASE("lattice size equals the product of cardinalities") {
  std::vector<FactorSpec> factors{
      {"a", {"1", "2"}}, {"b", {"1", "2", "3", "4"}}, {"c", {"1", "2", "3"}}};
  CellLattice lattice(std::move(factors));
  CHECK(lattice.size() == 2 * 4 * 3);
}

TEST_CASE("lattice construction rejects invalid factors") {
  auto make = [](std::vector<FactorSpec> f) { return CellLattice(std::move(f)); };
  CHECK_THROWS_AS(make({{"a", {"x"}}}), ValidationError);  // < 2 levels
  CHECK_THROWS_AS(make({{"a", {"x", "y"}}, {"a", {"p", "q"}}}), ValidationError);
  CHECK_THROWS_AS(make({{"", {"x", "y"}}}), ValidationError);
  CHECK_THROWS_AS(make({{"a", {"x", "x"}}}), ValidationError);
}

TEST_CASE("level lookup trims whitespace and is case-sensitive") {
  LatticePtr lattice = test::tiny_lattice();
  CHECK(lattice->level_index(0, " male ") == 0);
  CHECK_THROWS_AS(lattice->level_index(0, "Male"), ValidationError);
}

TEST_CASE("extend_lattice_with_party appends a 3-level factor") {
  LatticePtr extended = extend_lattice_with_party(test::tiny_lattice());
  CHECK(extended->size() == 18);
  CHECK(extended->factor(2).name == "party");
  CHECK_THROWS_AS(extend_lattice_with_party(extended), ValidationError);
}
