#include "mrp/weights.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mrp/csv.hpp"

namespace mrp {

namespace {

void normalize(std::vector<double>& w, const char* what, Warnings* warnings) {
  KahanSum total;
  for (double v : w) {
    if (v < 0.0) throw ValidationError(std::string(what) + ": negative weight");
    if (!std::isfinite(v)) throw ValidationError(std::string(what) + ": non-finite weight");
    total.add(v);
  }
  double t = total.value();
  if (t <= 0.0) throw ValidationError(std::string(what) + ": total weight is zero");
  if (warnings && std::abs(t - 1.0) > 0.01) {
    std::ostringstream msg;
    msg << what << ": raw total " << t << " differs from 1 by more than 1%; renormalized";
    warnings->push_back(msg.str());
  }
  for (double& v : w) v /= t;
}

}  // namespace

PartyShares make_party_shares(double dem, double rep, double other, Warnings* warnings) {
  std::vector<double> w{dem, rep, other};
  normalize(w, "party shares", warnings);
  return PartyShares{{w[0], w[1], w[2]}};
}

PartyShares parse_party_shares(std::string_view text, Warnings* warnings) {
  std::array<double, kNumParties> v{};
  std::size_t i = 0;
  std::string s(text);
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (i >= kNumParties) throw ValidationError("party shares: expected 3 values (DEM,REP,OTHER)");
    char* end = nullptr;
    std::string t(trim(cell));
    v[i] = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) {
      throw ValidationError("party shares: '" + t + "' is not a number");
    }
    ++i;
  }
  if (i != kNumParties) throw ValidationError("party shares: expected 3 values (DEM,REP,OTHER)");
  return make_party_shares(v[0], v[1], v[2], warnings);
}

WeightTable::WeightTable(LatticePtr lattice, std::vector<double> raw_weights,
                         Warnings* warnings)
    : lattice_(std::move(lattice)), weights_(std::move(raw_weights)) {
  if (weights_.size() != lattice_->size()) {
    throw ValidationError("weight vector has " + std::to_string(weights_.size()) +
                          " entries, lattice has " + std::to_string(lattice_->size()) +
                          " cells");
  }
  normalize(weights_, "weight table", warnings);
}

WeightTable uniform_weights(LatticePtr lattice) {
  std::vector<double> w(lattice->size(), 1.0);
  return WeightTable(std::move(lattice), std::move(w));
}

WeightTable load_weights(std::istream& in, const std::string& name, LatticePtr lattice,
                         Warnings* warnings) {
  std::vector<std::string> required;
  for (const auto& f : lattice->factors()) required.push_back(f.name);
  required.push_back("weight");
  csv::Reader reader(in, name, required, /*exact=*/true);

  std::vector<double> w(lattice->size(), 0.0);
  std::vector<bool> seen(lattice->size(), false);
  CellKey key(lattice->num_factors());
  while (reader.next()) {
    for (std::size_t f = 0; f < lattice->num_factors(); ++f) {
      try {
        key[f] = lattice->level_index(f, reader.field(lattice->factor(f).name));
      } catch (const ValidationError& e) {
        reader.fail(e.what());
      }
    }
    double v = reader.parse_double("weight");
    if (v < 0.0) reader.fail("negative weight");
    std::size_t pos = lattice->position(key);
    if (seen[pos]) reader.fail("duplicate cell row");
    seen[pos] = true;
    w[pos] = v;
  }
  try {
    return WeightTable(std::move(lattice), std::move(w), warnings);
  } catch (const ValidationError& e) {
    throw ValidationError(name + ": " + e.what());
  }
}

WeightTable load_weights_file(const std::string& path, LatticePtr lattice,
                              Warnings* warnings) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weight file: " + path);
  return load_weights(in, path, std::move(lattice), warnings);
}

void write_weights(std::ostream& out, const WeightTable& table) {
  const CellLattice& lat = *table.lattice();
  for (std::size_t f = 0; f < lat.num_factors(); ++f) {
    out << lat.factor(f).name << ',';
  }
  out << "weight\n";
  for (std::size_t pos = 0; pos < lat.size(); ++pos) {
    for (std::size_t f = 0; f < lat.num_factors(); ++f) {
      out << lat.factor(f).levels[lat.level_at(pos, f)] << ',';
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", table.weight(pos));
    out << buf << '\n';
  }
}

WeightTable extend_with_party(const WeightTable& demographic, const PartyShares& shares) {
  LatticePtr extended = extend_lattice_with_party(demographic.lattice());
  std::vector<double> w(extended->size());
  // Party is the last factor, so extended position = cell * 3 + party.
  for (std::size_t pos = 0; pos < demographic.lattice()->size(); ++pos) {
    for (int k = 0; k < kNumParties; ++k) {
      w[pos * kNumParties + k] = demographic.weight(pos) * shares.share[k];
    }
  }
  return WeightTable(std::move(extended), std::move(w));
}

bool weight_file_has_party(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weight file: " + path);
  std::string header;
  if (!std::getline(in, header)) {
    throw ValidationError(path + ": empty file, expected a header row");
  }
  std::stringstream ss(header);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (trim(cell) == kPartyFactorName) return true;
  }
  return false;
}

WeightTable marginalize_party(const WeightTable& extended) {
  const CellLattice& lat = *extended.lattice();
  std::size_t nf = lat.num_factors();
  if (nf < 2 || lat.factor(nf - 1).name != kPartyFactorName ||
      lat.factor(nf - 1).levels.size() != kNumParties) {
    throw ValidationError("weight table has no trailing party factor to marginalize");
  }
  std::vector<FactorSpec> factors(lat.factors().begin(), lat.factors().end() - 1);
  auto demographic = std::make_shared<const CellLattice>(std::move(factors));
  std::vector<double> w(demographic->size());
  for (std::size_t pos = 0; pos < demographic->size(); ++pos) {
    double acc = 0.0;
    for (int k = 0; k < kNumParties; ++k) acc += extended.weight(pos * kNumParties + k);
    w[pos] = acc;
  }
  return WeightTable(std::move(demographic), std::move(w));
}

}  // namespace mrp
