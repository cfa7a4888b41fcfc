#include "mrp/lattice.hpp"

#include <unordered_set>

namespace mrp {

CellLattice::CellLattice(std::vector<FactorSpec> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw ValidationError("lattice needs at least one factor");
  std::unordered_set<std::string> names;
  for (const auto& f : factors_) {
    if (f.name.empty()) throw ValidationError("factor with empty name");
    if (!names.insert(f.name).second) {
      throw ValidationError("duplicate factor name '" + f.name + "'");
    }
    if (f.levels.size() < 2) {
      throw ValidationError("factor '" + f.name + "' has " +
                            std::to_string(f.levels.size()) + " level(s), need at least 2");
    }
    std::unordered_set<std::string> labels;
    for (const auto& l : f.levels) {
      if (!labels.insert(l).second) {
        throw ValidationError("factor '" + f.name + "' has duplicate level '" + l + "'");
      }
    }
  }

  strides_.resize(factors_.size());
  std::size_t stride = 1;
  for (std::size_t f = factors_.size(); f-- > 0;) {
    strides_[f] = stride;
    stride *= factors_[f].levels.size();
  }
  size_ = stride;

  level_lookup_.resize(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    for (std::uint32_t l = 0; l < factors_[f].levels.size(); ++l) {
      level_lookup_[f].emplace(factors_[f].levels[l], l);
    }
  }
}

std::size_t CellLattice::position(std::span<const std::uint32_t> key) const {
  if (key.size() != factors_.size()) {
    throw ValidationError("cell key has " + std::to_string(key.size()) +
                          " indices, lattice has " + std::to_string(factors_.size()) +
                          " factors");
  }
  std::size_t pos = 0;
  for (std::size_t f = 0; f < key.size(); ++f) {
    if (key[f] >= factors_[f].levels.size()) {
      throw ValidationError("level index " + std::to_string(key[f]) +
                            " out of range for factor '" + factors_[f].name + "'");
    }
    pos += key[f] * strides_[f];
  }
  return pos;
}

CellKey CellLattice::key_at(std::size_t position) const {
  CellKey key(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    key[f] = static_cast<std::uint32_t>(position / strides_[f] % factors_[f].levels.size());
  }
  return key;
}

int CellLattice::factor_index(std::string_view name) const {
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (factors_[f].name == name) return static_cast<int>(f);
  }
  return -1;
}

std::uint32_t CellLattice::level_index(std::size_t f, std::string_view label) const {
  auto it = level_lookup_[f].find(std::string(trim(label)));
  if (it == level_lookup_[f].end()) {
    throw ValidationError("unknown level '" + std::string(trim(label)) + "' for factor '" +
                          factors_[f].name + "'");
  }
  return it->second;
}

bool CellLattice::same_shape(const CellLattice& other) const {
  if (factors_.size() != other.factors_.size()) return false;
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (factors_[f].name != other.factors_[f].name ||
        factors_[f].levels != other.factors_[f].levels) {
      return false;
    }
  }
  return true;
}

LatticePtr default_demographic_lattice() {
  std::vector<FactorSpec> factors;
  factors.push_back({"gender", {"male", "female"}});
  factors.push_back({"race", {"white", "black", "hispanic", "other"}});
  factors.push_back({"age", {"18-29", "30-44", "45-64", "65+"}});
  factors.push_back({"education", {"no-hs", "hs", "some-college", "college-grad"}});
  factors.push_back({"state",
                     {"AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "DC", "FL", "GA",
                      "HI", "ID", "IL", "IN", "IA", "KS", "KY", "LA", "ME", "MD", "MA",
                      "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ", "NM", "NY",
                      "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX",
                      "UT", "VT", "VA", "WA", "WV", "WI", "WY"}});
  return std::make_shared<const CellLattice>(std::move(factors));
}

LatticePtr extend_lattice_with_party(const LatticePtr& lattice) {
  if (lattice->factor_index(kPartyFactorName) >= 0) {
    throw ValidationError("lattice already has a '" + std::string(kPartyFactorName) +
                          "' factor");
  }
  std::vector<FactorSpec> factors = lattice->factors();
  factors.push_back({kPartyFactorName,
                     {std::string(to_string(Party::Dem)), std::string(to_string(Party::Rep)),
                      std::string(to_string(Party::Other))}});
  return std::make_shared<const CellLattice>(std::move(factors));
}

}  // namespace mrp
