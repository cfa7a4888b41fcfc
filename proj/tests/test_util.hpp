#pragma once

// Shared fixtures for the unit suites.

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mrp/lattice.hpp"
#include "mrp/panel.hpp"
#include "mrp/weights.hpp"

namespace mrp::test {

// 2 x 3 toy lattice (6 cells).
inline LatticePtr tiny_lattice() {
  std::vector<FactorSpec> factors{
      {"gender", {"male", "female"}},
      {"region", {"north", "south", "west"}},
  };
  return std::make_shared<const CellLattice>(std::move(factors));
}

inline Panel panel_from_csv(const std::string& body, LatticePtr lattice,
                            Warnings* warnings = nullptr) {
  std::istringstream in(body);
  return parse_panel(in, "test.csv", std::move(lattice), warnings);
}

// Response CSV header for the tiny lattice.
inline const char* kTinyHeader = "respondent_id,day,gender,region,party,intent\n";

}  // namespace mrp::test
