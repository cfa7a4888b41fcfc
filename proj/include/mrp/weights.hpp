#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mrp/lattice.hpp"

namespace mrp {

// Electorate shares by party, in Party enum order (DEM, REP, OTHER).
struct PartyShares {
  std::array<double, kNumParties> share;

  double operator[](Party p) const { return share[static_cast<std::size_t>(p)]; }
};

// Parses "0.4,0.4,0.2" (DEM,REP,OTHER order); accepts any positive total and
// normalizes, warning when the raw total is off by more than 1%.
PartyShares parse_party_shares(std::string_view text, Warnings* warnings = nullptr);
PartyShares make_party_shares(double dem, double rep, double other,
                              Warnings* warnings = nullptr);

// Proportion of the electorate in each lattice cell.  Dense over the
// lattice's canonical positions; normalized so the compensated sum is 1.
class WeightTable {
 public:
  WeightTable(LatticePtr lattice, std::vector<double> raw_weights,
              Warnings* warnings = nullptr);

  const LatticePtr& lattice() const { return lattice_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t position) const { return weights_[position]; }

 private:
  LatticePtr lattice_;
  std::vector<double> weights_;
};

// Uniform table: every cell weighs 1/size.
WeightTable uniform_weights(LatticePtr lattice);

// Reads a weight CSV (columns = factor names + `weight`).  Unlisted cells
// get weight 0; weights are normalized.  Errors: unknown level label,
// negative weight, duplicate cell row, zero total.
WeightTable load_weights(std::istream& in, const std::string& name, LatticePtr lattice,
                         Warnings* warnings = nullptr);
WeightTable load_weights_file(const std::string& path, LatticePtr lattice,
                              Warnings* warnings = nullptr);

void write_weights(std::ostream& out, const WeightTable& table);

// Independence construction of the (demographics x party) joint: the weight
// of (cell, party) is cell weight times party share.  Marginalizing the
// result over party recovers the demographic table exactly.
WeightTable extend_with_party(const WeightTable& demographic, const PartyShares& shares);

// True when the weight CSV header carries a `party` column, i.e. the file is
// a joint (demographics x party) table.
bool weight_file_has_party(const std::string& path);

// Sums a party-extended table over its trailing party factor.
WeightTable marginalize_party(const WeightTable& extended);

}  // namespace mrp
