#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrp/common.hpp"

namespace mrp {

struct FactorSpec {
  std::string name;
  std::vector<std::string> levels;
};

// One combination of factor levels, as per-factor level indices in the
// lattice's declared factor order.
using CellKey = std::vector<std::uint32_t>;

// The full Cartesian product of a set of demographic factors, enumerated in
// row-major order by declared factor order.  Immutable after construction;
// safe to share across threads.
class CellLattice {
 public:
  explicit CellLattice(std::vector<FactorSpec> factors);

  std::size_t size() const { return size_; }
  std::size_t num_factors() const { return factors_.size(); }
  const FactorSpec& factor(std::size_t f) const { return factors_[f]; }
  const std::vector<FactorSpec>& factors() const { return factors_; }

  // Canonical position of a key; bijective with key_at.
  std::size_t position(std::span<const std::uint32_t> key) const;
  CellKey key_at(std::size_t position) const;

  // Level index of factor f within the cell at `position` (no key
  // materialization).
  std::uint32_t level_at(std::size_t position, std::size_t f) const {
    return static_cast<std::uint32_t>(position / strides_[f] % factors_[f].levels.size());
  }

  // Index of the factor with the given name, or -1.
  int factor_index(std::string_view name) const;

  // Level index of `label` in factor f; throws ValidationError on unknown
  // labels (label is trimmed before matching).
  std::uint32_t level_index(std::size_t f, std::string_view label) const;

  bool same_shape(const CellLattice& other) const;

 private:
  std::vector<FactorSpec> factors_;
  std::vector<std::size_t> strides_;
  std::vector<std::unordered_map<std::string, std::uint32_t>> level_lookup_;
  std::size_t size_;
};

using LatticePtr = std::shared_ptr<const CellLattice>;

// The paper's partition: 2 gender x 4 race x 4 age x 4 education x 50 states
// plus DC, 6,528 cells.
LatticePtr default_demographic_lattice();

// Appends a 3-level "party" factor (DEM, REP, OTHER) after the demographic
// factors.
LatticePtr extend_lattice_with_party(const LatticePtr& lattice);

inline constexpr const char* kPartyFactorName = "party";

}  // namespace mrp
